"""Exact evaluation plus interpolation for minors and correlators.

Instead of expanding multivariate series, the reduced minor (or correlator) is
evaluated exactly at random rational points with a subset dynamic programme
over Hamiltonian cycles (see :func:`correlators.minor_value`).  The unknown
polynomial is expanded in a symmetric monomial ansatz whose size comes from
the per-variable degree bound; the square system is solved over Q and the
answer is confirmed at extra points, which certifies the ansatz.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .correlators import (
    CorrelatorPoly,
    PipelineError,
    _exp_to_da,
    _r2,
    correlator_value,
    minor_value,
    one_point_minor_series,
)
from .exact import Cyclotomic, InconsistentSystem, solve_exact
from .symfun import Partition, SymPoly, monomial_value, partitions
from .wave import WaveModel

__all__ = ["InterpolationConfig", "correlator_by_interpolation", "subleading_poly", "subleading_value"]


@dataclass(frozen=True)
class InterpolationConfig:
    """Random-point settings; ``extra`` points beyond the ansatz size check the fit."""

    seed: int = 20240601
    extra: int = 4
    height: int = 40


DEFAULT = InterpolationConfig()


def _points(count: int, nvars: int, cfg: InterpolationConfig, avoid=()) -> list[tuple[Fraction, ...]]:
    rng = random.Random(cfg.seed + 7919 * nvars + count)
    out = []
    seen = set()
    bad = {abs(Fraction(a)) for a in avoid}
    while len(out) < count:
        pt = []
        used = set(bad)
        while len(pt) < nvars:
            q = Fraction(rng.randint(1, cfg.height), rng.randint(1, cfg.height))
            if q in used or q == 0:
                continue
            used.add(q)
            pt.append(q)
        key = tuple(sorted(pt))
        if key in seen:
            continue
        seen.add(key)
        out.append(tuple(pt))
    return out


def _solve_scalar_system(rows, values, field):
    """Solve rows * c = values where values are Fractions or Cyclotomic elements."""
    if field is None:
        rhs = [[Fraction(v)] for v in values]
        sol = solve_exact(rows, rhs)
        return [s[0] for s in sol]
    vecs = []
    for v in values:
        c = v if isinstance(v, Cyclotomic) else Cyclotomic.rational(field, v)
        vecs.append(list(c.coeffs))
    sol = solve_exact(rows, vecs)
    return [Cyclotomic(field, tuple(s)) for s in sol]


def _fit(ansatz, point_values, field):
    rows = [[monomial_value(lam, pt) for lam in ansatz] for pt, _ in point_values]
    vals = [v for _, v in point_values]
    try:
        coeffs = _solve_scalar_system(rows, vals, field)
    except InconsistentSystem as exc:
        raise PipelineError("interpolation ansatz rejected by the verification points") from exc
    except ZeroDivisionError as exc:
        raise PipelineError("interpolation points are degenerate") from exc
    return coeffs


# ------------------------------------------------------- subleading polys


def _prefactor_rairy(model: WaveModel, alpha: int, n: int):
    """(-1)^(n-1) i^(r-alpha) zeta^(alpha/2) (1 - zeta^alpha)^(n-2) / r^n."""
    r, N = model.r, model.field
    i_pow = Cyclotomic.root(N, (N // 4) * (r - alpha) % N)
    zh = Cyclotomic.root(N, (N // (2 * r)) * alpha % N)
    one = Cyclotomic.one(N)
    base = one - Cyclotomic.root(N, (N // r) * alpha % N)
    pw = base ** (n - 2) if n >= 2 else base.inverse() ** (2 - n)
    sign = 1 if (n - 1) % 2 == 0 else -1
    return i_pow * zh * pw * Fraction(sign, r**n)


def subleading_value(model: WaveModel, k: int, zs, sector=None):
    """P_{k,n-1} (or R^(alpha)) evaluated at u_j = 1/z_j, special point z_i = 1.

    ``zs`` are the n - 1 non-special points.
    """
    zs = tuple(Fraction(z) for z in zs)
    n = len(zs) + 1
    pts = (Fraction(1),) + zs
    if _r2(model):
        sector = "+" if sector is None else sector
        w = minor_value(model, sector, 0, pts, k) if n > 1 else None
        val = Fraction(-(2 ** (k + 2))) * w
        for z in zs:
            val *= 1 - z * z
        return val
    alpha = int(sector)
    N = model.field
    w = minor_value(model, alpha, 0, pts, k)
    c = Cyclotomic.root(N, (N // model.r) * alpha % N)
    den = Cyclotomic.one(N)
    for z in zs:
        den = den * ((1 - z) * (c - z))
    return w * den / _prefactor_rairy(model, alpha, n)


def _n1_constant(model: WaveModel, k: int, sector):
    """P_{k,0}: the n = 1 minor coefficient with the same normalisation."""
    data = one_point_minor_series(model, sector, k + 1)
    _, e, c = data[k]
    if _r2(model):
        return Fraction(-(2 ** (k + 2))) * c
    return c / _prefactor_rairy(model, int(sector), 1)


def _ansatz(model: WaveModel, k: int, m: int):
    if _r2(model):
        top = (model.step * k) // 2
        out = []
        for w in range(0, top * m + 1):
            out.extend(lam for lam in partitions(w, m, max_part=top))
        return out
    top = (model.r + 1) * k
    out = []
    for w in range(0, top * m + 1):
        out.extend(lam for lam in partitions(w, m, max_part=top))
    return out


@lru_cache(maxsize=None)
def _subleading_cached(model: WaveModel, k: int, n: int, sector, cfg: InterpolationConfig) -> SymPoly:
    m = n - 1
    if m == 0:
        c = _n1_constant(model, k, sector)
        return SymPoly(0, "m", {Partition(()): c})
    ansatz = _ansatz(model, k, m)
    avoid = (1,)
    pts = _points(len(ansatz) + cfg.extra, m, cfg, avoid=avoid)
    data = []
    for pt in pts:
        v = subleading_value(model, k, pt, sector)
        if _r2(model):
            var = tuple(1 / (z * z) for z in pt)
        else:
            var = tuple(1 / z for z in pt)
        data.append((var, v))
    coeffs = _fit(ansatz, data, model.field)
    out = {}
    for lam, c in zip(ansatz, coeffs):
        if isinstance(c, Cyclotomic):
            q = c.rational_value()
            c = q if (q is not None and model.field is None) else c
        if c:
            out[lam] = c
    return SymPoly(m, "m", out)


def subleading_poly(model: WaveModel, k: int, n: int, sector=None, config: InterpolationConfig = DEFAULT) -> SymPoly:
    """The polynomial P_{k,n-1} (Q_{k,n-1} for Bessel, R^(alpha)_{k,n-1} for r-Airy).

    Computed from the minor with n points; the result has n - 1 variables.  For
    the r = 2 models it is returned in the squared variables u_j^2 (it is even).
    ``n = 1`` returns the constant obtained from the one-point minor.
    """
    if n < 1 or k < 0:
        raise ValueError("need n >= 1 and k >= 0")
    if _r2(model):
        sector = "+" if sector is None else sector
        if sector != "+":
            raise ValueError("the polynomial families are defined for the + sector")
    else:
        if sector is None or not 1 <= int(sector) <= model.r - 1:
            raise ValueError("r-Airy families need a sector alpha in 1..r-1")
        sector = int(sector)
    return _subleading_cached(model, k, n, sector, config)


# ---------------------------------------------------- correlator fitting


def correlator_by_interpolation(model: WaveModel, g: int, n: int, config: InterpolationConfig = DEFAULT) -> CorrelatorPoly:
    """W_{g,n} from exact point values; support ansatz from the degree constraint."""
    order = 2 * g - 2 + n
    if order <= 0:
        raise ValueError("need 2g - 2 + n > 0")
    r = model.r
    # reduced correlator = sum c prod u_i^(m_i + 1), u = 1/z, m_i = r d_i + a_i
    # sum of m_i: (r + 1)(2g - 2 + n) for psi and r-spin, 2(g - 1) + n for Theta
    total = (r + 1) * order if model.kind != "bessel" else 2 * (g - 1) + n
    ansatz = []
    for lam in partitions(total, n):
        parts = lam.parts
        if any(p == 0 or p % r == 0 for p in parts):
            continue
        ansatz.append(lam)
    shifted = [Partition(tuple(p + 1 for p in lam.parts)) for lam in ansatz]
    poly = CorrelatorPoly(model, g, n)
    if not ansatz:
        return poly
    pts = _points(len(ansatz) + config.extra, n, config)
    data = []
    for pt in pts:
        v = correlator_value(model, pt, order)
        data.append((tuple(1 / z for z in pt), v))
    coeffs = _fit(shifted, data, model.field)
    from .symfun import distinct_permutations

    for lam, c in zip(ansatz, coeffs):
        if isinstance(c, Cyclotomic) and model.field is None:
            c = c.rational_value()
        if not c:
            continue
        for perm in distinct_permutations(lam.parts):
            da = [_exp_to_da(model, -(m + r)) for m in perm]
            d = tuple(t[0] for t in da)
            a = tuple(t[1] for t in da)
            poly.coeffs[(d, a)] = c
    for (d, a) in poly.coeffs:
        if not poly.d_constraint(d, a):
            raise PipelineError("degree constraint violated")
    return poly
