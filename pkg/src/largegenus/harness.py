"""Large-genus verification experiments and their CSV output.

Five sequence kinds are supported:

G   normalised psi/Theta numbers minus K known corrections (tends to 1)
H   the same residual rescaled so it tends to the next coefficient
I   normalised r-spin numbers against the closest pair of actions (oscillates)
J   I with K leading-pair corrections removed, rescaled to expose the next action
L   2g sqrt(W_{g,2}/W_{g+1,2}) on a grid of (x1, x2), tending to the smaller action

Exact numbers come from :mod:`correlators` and go through :mod:`cache`, so a
rerun with ``LARGEGENUS_CACHE`` set only computes new genera.
"""

from __future__ import annotations

import configparser
import csv
import io
import math
from dataclasses import dataclass, field, fields, replace
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import mpmath

from .asymptotics import DEFAULT_FAMILY, alpha_k, beta_k, gamma_k, gamma_k_direct
from .correlators import intersection_number, two_point_poly
from .exact import Multiplicities, r_factorial
from .wave import AIRY, BESSEL, WaveModel, rairy

__all__ = [
    "ConfigError",
    "CsvTable",
    "DegenerateFit",
    "ExperimentSpec",
    "fit_rate",
    "insertions",
    "load_config",
    "model_of",
    "rspin_sequences",
    "run_experiment",
]

KINDS = ("G", "H", "I", "J", "L")


class ConfigError(ValueError):
    """An experiment description that cannot be run as written."""


class DegenerateFit(ValueError):
    """Too few usable rows, or no spread in g."""


# ------------------------------------------------------------------ specs


@dataclass(frozen=True)
class ExperimentSpec:
    """One experiment.

    The insertion pattern is ``fixed`` small entries plus one entry that
    absorbs the rest of the degree.  For psi/Theta ``fixed`` lists d-values;
    for r-spin it lists (d, a) pairs.  Genera where the absorbing entry is not
    admissible (r-spin with r | m) are skipped when ``skip_invalid`` is set and
    rejected otherwise.
    """

    kind: str
    model: str = "airy"
    r: int = 2
    fixed: tuple = ()
    K: int = 0
    g_min: int = 10
    g_max: int = 60
    g_step: int = 1
    precision: int = 30
    grid: int = 20
    x_max: float = 2.0
    skip_invalid: bool = True
    out: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}")
        if self.model not in ("airy", "bessel", "rspin"):
            raise ConfigError(f"unknown model {self.model!r}")
        if self.model == "rspin" and self.r < 3:
            raise ConfigError("r-spin experiments need r >= 3")
        if self.kind in ("G", "H") and self.model == "rspin":
            raise ConfigError("G and H are defined for psi and Theta numbers")
        if self.kind in ("I", "J") and self.model != "rspin":
            raise ConfigError("I and J are r-spin sequences")
        if self.kind == "J" and self.r < 4:
            raise ConfigError("J needs a second action modulus, i.e. r >= 4")
        if self.kind == "L" and self.model != "airy":
            raise ConfigError("L is defined for Airy correlators")
        if self.K < 0 or self.g_min < 1 or self.g_max < self.g_min or self.g_step < 1:
            raise ConfigError("bad K or genus range")

    @property
    def n(self) -> int:
        return len(self.fixed) + 1

    def genera(self) -> list[int]:
        return list(range(self.g_min, self.g_max + 1, self.g_step))


def model_of(spec: ExperimentSpec) -> WaveModel:
    return {"airy": AIRY, "bessel": BESSEL}.get(spec.model) or rairy(spec.r)


def insertions(spec: ExperimentSpec, g: int):
    """(d, a) at genus g, or None if the pattern has no admissible point there."""
    n = spec.n
    if spec.model in ("airy", "bessel"):
        total = 3 * g - 3 + n if spec.model == "airy" else g - 1
        fixed = tuple(int(x) for x in spec.fixed)
        rest = total - sum(fixed)
        if rest < 0 or any(x < 0 for x in fixed):
            return _invalid(spec, g, "fixed entries exceed the degree")
        return fixed + (rest,), (1,) * n
    r = spec.r
    fixed = tuple((int(d), int(a)) for d, a in spec.fixed)
    if any(not 1 <= a <= r - 1 or d < 0 for d, a in fixed):
        return _invalid(spec, g, "bad fixed (d, a)")
    rest = (r + 1) * (2 * g - 2 + n) - sum(r * d + a for d, a in fixed)
    if rest < 1 or rest % r == 0:
        return _invalid(spec, g, f"remaining degree {rest} is not admissible")
    d_last, a_last = divmod(rest, r)
    return tuple(d for d, _ in fixed) + (d_last,), tuple(a for _, a in fixed) + (a_last,)


def _invalid(spec: ExperimentSpec, g: int, why: str):
    if spec.skip_invalid:
        return None
    raise ConfigError(f"g = {g}: {why}")


# ------------------------------------------------------------------ tables


def _fmt(x) -> str:
    """Locale-independent decimal string (repr of a float, or mpmath digits)."""
    if isinstance(x, int):
        return str(x)
    if isinstance(x, mpmath.mpf):
        return mpmath.nstr(x, 17)
    return repr(float(x))


@dataclass
class CsvTable:
    """Header plus rows of decimal strings; the first column is g (or x1, x2 for L)."""

    header: list[str]
    rows: list[list[str]] = field(default_factory=list)

    def add(self, *values) -> None:
        if len(values) != len(self.header):
            raise ValueError("row length does not match the header")
        self.rows.append([_fmt(v) for v in values])

    def column(self, name: str) -> list[float]:
        j = self.header.index(name)
        return [float(row[j]) for row in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header)
        w.writerows(self.rows)
        return buf.getvalue()

    def write(self, path: str | Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_csv())

    @classmethod
    def from_csv(cls, text: str) -> "CsvTable":
        reader = list(csv.reader(io.StringIO(text)))
        if not reader:
            raise ValueError("empty CSV")
        return cls(reader[0], [list(r) for r in reader[1:]])

    @classmethod
    def read(cls, path: str | Path) -> "CsvTable":
        return cls.from_csv(Path(path).read_text())

    def check_monotone(self) -> bool:
        if self.header[0] != "g":
            return True
        gs = [int(r[0]) for r in self.rows]
        return all(a < b for a, b in zip(gs, gs[1:]))


# -------------------------------------------------------------- sequences


def _mp(q: Fraction):
    return mpmath.mpf(q.numerator) / q.denominator


def _ff(x, k: int):
    out = mpmath.mpf(1)
    for i in range(k):
        out *= x - i
    return out


def _double_factorial_prod(d: Sequence[int]) -> int:
    out = 1
    for x in d:
        out *= r_factorial(2 * x + 1, 2)
    return out


def _g_value(spec: ExperimentSpec, g: int, d, K: int):
    """G_{d,K}: normalised number minus K known corrections."""
    model = model_of(spec)
    n = len(d)
    M = 2 * g - 2 + n
    v = _mp(intersection_number(model, d, (1,) * n))
    # Stokes constants 1 (Airy) and 2 (Bessel) are folded into 4 pi and 2 pi
    if spec.model == "airy":
        A, lead, coeff = mpmath.mpf(2) / 3, 4 * mpmath.pi, alpha_k
    else:
        A, lead, coeff = mpmath.mpf(2), 2 * mpmath.pi, beta_k
    val = lead / 2**n * mpmath.exp(M * mpmath.log(A) - mpmath.loggamma(M)) * _double_factorial_prod(d) * v
    p = Multiplicities.from_tuple(d)
    for k in range(1, K + 1):
        val -= A**k * _mp(coeff(k, p, DEFAULT_FAMILY)) / _ff(M - 1, k)
    return val


def _i_value(spec: ExperimentSpec, g: int, d, a):
    r = spec.r
    n = len(d)
    M = 2 * g - 2 + n
    model = rairy(r)
    v = _mp(intersection_number(model, d, a))
    prod = 1
    for di, ai in zip(d, a):
        prod *= r_factorial(r * di + ai, r)
    A1 = _abs_action(r, 1)
    sign = -1 if (g - 1 - sum(d)) % 2 else 1
    # the leading Stokes constant is taken as 1 here (see the README)
    return 2 * mpmath.pi / 2**n * sign * mpmath.power(r, g - 1 - sum(d)) * mpmath.exp(M * mpmath.log(A1) - mpmath.loggamma(M)) * prod * v


def _abs_action(r: int, alpha: int):
    return 2 * mpmath.mpf(r) / (r + 1) * mpmath.sin(mpmath.pi * alpha / r)


def _gamma_real(r: int, k: int, d, a):
    from .exact import cyclo_embed

    c = gamma_k_direct(r, 1, k, d, a) if len(d) == 1 else gamma_k(r, 1, k, d, a)
    return mpmath.mpc(cyclo_embed(c, precision=max(mpmath.mp.dps, 16))).real


def _j_value(spec: ExperimentSpec, g: int, d, a):
    r = spec.r
    n = len(d)
    M = 2 * g - 2 + n
    A1, A2 = _abs_action(r, 1), _abs_action(r, 2)
    sign = -1 if (sum(d) - g + 1) % 2 else 1
    acc = _i_value(spec, g, d, a)
    # k <= M - 2 keeps (2g-3+n)^(k) away from zero
    for k in range(min(spec.K, M - 2) + 1):
        acc -= A1**k / _ff(M - 1, k) * sign * _gamma_real(r, k, d, a)
    return mpmath.power(A2 / A1, M) * acc


def _w2_value(poly, x1, x2):
    total = mpmath.mpf(0)
    for (d, a), c in poly.coeffs.items():
        total += _mp(c) * mpmath.power(x1, -(d[0] + mpmath.mpf(3) / 2)) * mpmath.power(x2, -(d[1] + mpmath.mpf(3) / 2))
    return total


def run_experiment(spec: ExperimentSpec) -> CsvTable:
    """Evaluate the sequence described by ``spec``; writes ``spec.out`` if set."""
    with mpmath.workdps(spec.precision):
        table = _run(spec)
    if spec.out:
        table.write(spec.out)
    return table


def _run(spec: ExperimentSpec) -> CsvTable:
    if spec.kind == "L":
        return _run_l(spec)
    table = CsvTable(["g", spec.kind])
    for g in spec.genera():
        ins = insertions(spec, g)
        if ins is None:
            continue
        d, a = ins
        n = len(d)
        M = 2 * g - 2 + n
        if spec.kind == "G":
            val = _g_value(spec, g, d, spec.K)
        elif spec.kind == "H":
            A = mpmath.mpf(2) / 3 if spec.model == "airy" else mpmath.mpf(2)
            if spec.K == 0:
                val = _g_value(spec, g, d, 0)
            else:
                # the leading 1 is removed so the rescaled residual has a limit
                val = _ff(M - 1, spec.K) / A**spec.K * (_g_value(spec, g, d, spec.K - 1) - 1)
        elif spec.kind == "I":
            val = _i_value(spec, g, d, a)
        else:
            val = _j_value(spec, g, d, a)
        table.add(g, val)
    return table


def _run_l(spec: ExperimentSpec) -> CsvTable:
    if spec.fixed:
        raise ConfigError("L takes no insertion pattern")
    g = spec.g_min
    w_g = two_point_poly(AIRY, g)
    w_next = two_point_poly(AIRY, g + 1)
    table = CsvTable(["x1", "x2", "L", "min_action"])
    step = mpmath.mpf(spec.x_max) / spec.grid
    for i in range(1, spec.grid + 1):
        for j in range(1, spec.grid + 1):
            x1, x2 = i * step, j * step
            ratio = _w2_value(w_g, x1, x2) / _w2_value(w_next, x1, x2)
            val = 2 * g * mpmath.sqrt(ratio)
            target = mpmath.mpf(4) / 3 * min(x1, x2) ** mpmath.mpf(1.5)
            table.add(x1, x2, val, target)
    return table


# -------------------------------------------------------------------- fits


def fit_rate(table: CsvTable, target: float, column: str | None = None) -> float:
    """Least-squares slope of log|value - target| against log g over the upper half."""
    column = column or table.header[1]
    gs = table.column(table.header[0])
    vals = table.column(column)
    if len(gs) < 10:
        raise DegenerateFit("need at least 10 rows")
    half = len(gs) // 2
    xs, ys = [], []
    for g, v in zip(gs[half:], vals[half:]):
        err = abs(v - target)
        if err == 0 or not math.isfinite(err):
            raise DegenerateFit(f"value equals the target at g = {g}")
        xs.append(math.log(g))
        ys.append(math.log(err))
    mx = sum(xs) / len(xs)
    my = sum(ys) / len(ys)
    sxx = sum((x - mx) ** 2 for x in xs)
    if sxx == 0:
        raise DegenerateFit("no spread in g")
    return sum((x - mx) * (y - my) for x, y in zip(xs, ys)) / sxx


def rspin_sequences(r: int, K: int, g_min: int = 20, g_max: int = 200, g_step: int = 10, precision: int = 120):
    """(I, J) for one-point r-spin numbers, the last entry absorbing the degree."""
    base = dict(model="rspin", r=r, g_min=g_min, g_max=g_max, g_step=g_step, precision=precision)
    i_table = run_experiment(ExperimentSpec(kind="I", **base))
    j_table = run_experiment(ExperimentSpec(kind="J", K=K, **base))
    return i_table, j_table


# ------------------------------------------------------------------ config


_INT_FIELDS = {"r", "K", "g_min", "g_max", "g_step", "precision", "grid"}


def _parse_fixed(text: str, model: str) -> tuple:
    text = text.strip()
    if not text:
        return ()
    items = [t.strip() for t in text.split(",") if t.strip()]
    if model == "rspin":
        out = []
        for t in items:
            if ":" not in t:
                raise ConfigError(f"r-spin fixed entries are d:a pairs, got {t!r}")
            d, a = t.split(":")
            out.append((int(d), int(a)))
        return tuple(out)
    return tuple(int(t) for t in items)


def load_config(path: str | Path, overrides: dict | None = None) -> list[ExperimentSpec]:
    """Read experiments from an INI file, one section per experiment.

    Keys are the :class:`ExperimentSpec` field names; ``fixed`` is a comma
    list (``0,1``, or ``0:1,2:2`` for r-spin).  A ``[defaults]`` section
    applies to every experiment.
    """
    parser = configparser.ConfigParser()
    parser.optionxform = str  # keep "K" distinct from "k"
    if not parser.read(path):
        raise ConfigError(f"cannot read {path}")
    defaults = dict(parser["defaults"]) if parser.has_section("defaults") else {}
    names = {f.name for f in fields(ExperimentSpec)}
    specs = []
    for section in parser.sections():
        if section == "defaults":
            continue
        raw = {**defaults, **dict(parser[section]), **(overrides or {})}
        unknown = set(raw) - names
        if unknown:
            raise ConfigError(f"[{section}] unknown keys: {sorted(unknown)}")
        kw: dict = {}
        model = raw.get("model", "airy")
        for key, val in raw.items():
            if key in _INT_FIELDS:
                kw[key] = int(val)
            elif key == "x_max":
                kw[key] = float(val)
            elif key == "skip_invalid":
                kw[key] = str(val).lower() in ("1", "true", "yes", "on")
            elif key == "fixed":
                kw[key] = _parse_fixed(val, model)
            else:
                kw[key] = val
        specs.append(ExperimentSpec(**kw))
    return specs


def with_range(spec: ExperimentSpec, genera: Iterable[int]) -> ExperimentSpec:
    gs = sorted(genera)
    return replace(spec, g_min=gs[0], g_max=gs[-1])
