"""Intersection numbers from determinantal formulae, and their large-genus behaviour.

Submodules:

* ``exact``: rationals, cyclotomic scalars, factorial helpers.
* ``series``: truncated series in hbar and Laurent blocks in several variables.
* ``wave``: WKB coefficients for the Airy, Bessel and r-Airy systems.
* ``correlators``: n-point correlators and the intersection numbers read off them.
* ``symfun``: symmetric polynomials and basis changes.
* ``asymptotics``: subleading coefficients and truncated large-genus estimates.
* ``harness``: numerical sequences, CSV output and rate fits.
"""

from .asymptotics import (
    FamilyConfig,
    alpha_k,
    alpha_symbolic,
    asymptotic_estimate,
    beta_k,
    beta_symbolic,
    gamma_k,
    gamma_k_direct,
)
from .correlators import PipelineError, correlator, extract_intersection, intersection_number
from .exact import Cyclotomic, Multiplicities
from .harness import CsvTable, ExperimentSpec, fit_rate, run_experiment
from .wave import AIRY, BESSEL, rairy

__version__ = "0.1.0"

__all__ = [
    "AIRY",
    "BESSEL",
    "CsvTable",
    "Cyclotomic",
    "ExperimentSpec",
    "FamilyConfig",
    "Multiplicities",
    "PipelineError",
    "alpha_k",
    "alpha_symbolic",
    "asymptotic_estimate",
    "beta_k",
    "beta_symbolic",
    "correlator",
    "extract_intersection",
    "fit_rate",
    "gamma_k",
    "gamma_k_direct",
    "intersection_number",
    "rairy",
    "run_experiment",
]
