import os
from pathlib import Path

from hypothesis import HealthCheck, settings

# Persisted families and intersection numbers make the slow suites tolerable.
# Families are re-checked against their stored seeds when loaded.
os.environ.setdefault("LARGEGENUS_CACHE", str(Path(__file__).resolve().parent.parent / ".cache"))

settings.register_profile(
    "default",
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.register_profile("thorough", max_examples=300, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))
