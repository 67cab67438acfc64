"""Memo of computed intersection numbers, optionally persisted as JSON.

Set ``LARGEGENUS_CACHE`` to a directory to persist between runs.  Entries are
keyed by (model, g, n, d, a) and stored as exact "num/den" strings.
"""

from __future__ import annotations

import json
import os
from fractions import Fraction
from pathlib import Path

from .exact import frac_from_str, frac_to_str

_memory: dict[str, Fraction] = {}
_loaded: set[str] = set()


def _key(model: str, g: int, n: int, d, a) -> str:
    return f"{model}|{g}|{n}|{','.join(map(str, d))}|{','.join(map(str, a))}"


def _path(model: str) -> Path | None:
    root = os.environ.get("LARGEGENUS_CACHE")
    if not root:
        return None
    return Path(root) / f"{model}.json"


def _load(model: str) -> None:
    if model in _loaded:
        return
    _loaded.add(model)
    p = _path(model)
    if p is None or not p.exists():
        return
    try:
        raw = json.loads(p.read_text())
    except (OSError, json.JSONDecodeError):
        return
    for k, v in raw.items():
        _memory.setdefault(k, frac_from_str(v))


def lookup(model: str, g: int, n: int, d, a) -> Fraction | None:
    _load(model)
    return _memory.get(_key(model, g, n, d, a))


def store(model: str, g: int, n: int, d, a, value: Fraction) -> None:
    _memory[_key(model, g, n, d, a)] = value
    p = _path(model)
    if p is None:
        return
    p.parent.mkdir(parents=True, exist_ok=True)
    prefix = f"{model}|"
    data = {k: frac_to_str(v) for k, v in _memory.items() if k.startswith(prefix)}
    tmp = p.with_suffix(".tmp")
    tmp.write_text(json.dumps(data, sort_keys=True))
    tmp.replace(p)


def clear() -> None:
    _memory.clear()
    _loaded.clear()
