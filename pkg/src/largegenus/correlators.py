"""Kernels, n-point correlators, one-instanton minors and intersection numbers.

All objects are built from the wave-function components of :mod:`wave` through
the kernel form of the determinantal formula

    W_n = (-1)^(n-1) sum_{cyclic sigma} prod_i K_{+,-}(x_i, x_sigma(i)).

Kernels are stored in a reduced frame: with z = x^(1/r),

    K(x, y) = (z w)^(-(r-1)/2) * N(z, w) / (z^r - w^r)

where N has integer exponents.  In a cyclic product every variable meets the
prefactor twice, so the correlator is prod_i z_i^(-(r-1)) times a product of
reduced kernels.  In the reduced frame the support of every W_{g,n} lies in
{e_i <= -2} for all three models.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

from .exact import Cyclotomic, r_factorial
from .series import HbarSeries, LaurentBlock, default_ranks
from .wave import Component, WaveModel, component

__all__ = [
    "CorrelatorPoly",
    "KernelSeries",
    "MinorSeries",
    "PipelineError",
    "correlator",
    "cyclic_permutations",
    "extract_intersection",
    "intersection_number",
    "kernel",
    "kernel_value",
    "minor",
    "minor_value",
    "ode_check_w1",
    "one_point_series",
    "one_point_minor_series",
    "cyclic_sum_sides",
    "sine_weighted_sides",
    "transseries_sector",
    "two_point_poly",
]


class PipelineError(RuntimeError):
    """Raised when an exact identity that must hold fails (truncation or bug)."""


# --------------------------------------------------------------- labels


def _r2(model: WaveModel) -> bool:
    return model.kind in ("airy", "bessel")


def normalize_pair(model: WaveModel, pair) -> tuple:
    """Canonical kernel label.

    r = 2 models: ("+","-"), ("-","+"), ("+","+"), ("-","-").
    r-Airy: ("+","-"), ("-","+") and (alpha, "-") for the sector kernels.
    """
    if isinstance(pair, str):
        pair = tuple(pair)
    pair = tuple(pair)
    if model.kind == "rairy":
        a, b = pair
        if a == "+" and b == "-":
            return ("+", "-")
        if a == "-" and b == "+":
            return ("-", "+")
        if isinstance(a, int) or (isinstance(a, str) and a.lstrip("+").isdigit()):
            alpha = int(str(a).lstrip("+"))
            if alpha == model.r:
                return ("+", "-")
            if not 1 <= alpha < model.r or b != "-":
                raise ValueError(f"bad r-Airy kernel label {pair}")
            return (alpha, "-")
        raise ValueError(f"bad r-Airy kernel label {pair}")
    if pair not in (("+", "-"), ("-", "+"), ("+", "+"), ("-", "-")):
        raise ValueError(f"bad kernel label {pair}")
    return pair


def _kernel_terms(model: WaveModel, pair: tuple):
    """Bilinear terms (coef, label_x, label_y) of a kernel numerator."""
    if _r2(model):
        a, b = (1 if s == "+" else -1 for s in pair)
        return ((1, ("dpsi", a), ("psi", b)), (-1, ("psi", a), ("dpsi", b)))
    r = model.r
    if pair == ("-", "+"):
        return tuple((-1, ("phi", r, m), ("psi", r, r - 1 - m)) for m in range(r))
    alpha = r if pair == ("+", "-") else pair[0]
    return tuple((1, ("psi", alpha, m), ("phi", r, r - 1 - m)) for m in range(r))


def _trace_terms(model: WaveModel, sector):
    """Terms (coef, z-shift, label_a, label_b) of hbar * W_1 (sector None) or of
    hbar * W_1^(sector) for the n = 1 minors."""
    if _r2(model):
        s = {None: None, "+": -1, "-": 1}[sector]
        xs = 2 if model.kind == "airy" else 0
        ds = 0 if model.kind == "airy" else -2
        if s is None:
            return ((1, xs, ("psi", -1), ("psi", 1)), (-1, ds, ("dpsi", -1), ("dpsi", 1)))
        return ((1, xs, ("psi", s), ("psi", s)), (-1, ds, ("dpsi", s), ("dpsi", s)))
    r = model.r
    alpha = r if sector is None else int(sector)
    terms = [(1, 0, ("psi", alpha, m), ("phi", r, r - m)) for m in range(1, r)]
    terms.append((1, r, ("psi", alpha, 0), ("phi", r, 0)))
    return tuple(terms)


def _norm(model: WaveModel) -> Fraction:
    return Fraction(1, model.r)


def _zero(model: WaveModel):
    return Cyclotomic.zero(model.field) if model.field else Fraction(0)


def _one(model: WaveModel):
    return Cyclotomic.one(model.field) if model.field else Fraction(1)


def _bilinear_coeff(ca: Component, cb: Component, a: int, b: int):
    return ca.coefficient(a) * cb.coefficient(b)


def _bilinear_order(ca: Component, cb: Component, total: int, lo: int = 0, hi: int | None = None):
    """sum_{a+b=total} coeff_a(ca) coeff_b(cb), grouping zeta powers first."""
    hi = total if hi is None else min(hi, total)
    if ca.field is None:
        acc = Fraction(0)
        sa, sb = ca.seq, cb.seq
        for a in range(lo, hi + 1):
            acc += sa[a] * sb[total - a]
        return ca.prefactor * cb.prefactor * acc
    N = ca.field
    groups: dict[int, Fraction] = {}
    sa, sb = ca.seq, cb.seq
    for a in range(lo, hi + 1):
        b = total - a
        t = (ca.twist * a + cb.twist * b) % N
        groups[t] = groups.get(t, 0) + sa[a] * sb[b]
    return ca.prefactor * cb.prefactor * Cyclotomic.from_powers(N, groups)


# ------------------------------------------------------ kernel numerators


@lru_cache(maxsize=None)
def kernel_numerator(model: WaveModel, pair: tuple, order: int) -> tuple:
    """Per hbar-order k <= order: dict {(e_x, e_y): scalar} of the reduced numerator
    (normalisation 1/r included)."""
    pair = normalize_pair(model, pair)
    half = Fraction(model.r - 1, 2)
    step = model.step
    norm = _norm(model)
    comps = [
        (coef, component(model, lx, order), component(model, ly, order)) for coef, lx, ly in _kernel_terms(model, pair)
    ]
    out = []
    for k in range(order + 1):
        terms: dict[tuple[int, int], object] = {}
        for coef, cx, cy in comps:
            for a in range(k + 1):
                b = k - a
                ex = cx.zexp + half - step * a
                ey = cy.zexp + half - step * b
                assert ex.denominator == 1 and ey.denominator == 1
                key = (int(ex), int(ey))
                val = _bilinear_coeff(cx, cy, a, b) * (coef * norm)
                if key in terms:
                    terms[key] = terms[key] + val
                else:
                    terms[key] = val
        out.append({e: c for e, c in terms.items() if c})
    return tuple(out)


def kernel_value(model: WaveModel, pair, k: int, z, w):
    """Reduced kernel N_k(z, w)/(z^r - w^r) at exact numbers z != w."""
    num = kernel_numerator(model, normalize_pair(model, pair), k)[k]
    acc = 0
    for (ex, ey), c in num.items():
        acc = acc + c * (z**ex) * (w**ey)
    r = model.r
    return acc / (z**r - w**r)


# --------------------------------------------------------- kernel series


@dataclass(frozen=True)
class KernelSeries:
    """Kernel K_pair(x_i, x_j) as an hbar-series of reduced Laurent blocks.

    The full kernel is (z_i z_j)^(-(r-1)/2) times the stored blocks.
    """

    model: WaveModel
    pair: tuple
    var_pair: tuple[int, int]
    data: HbarSeries


def _numerator_block(model, pair, k, i, j, nvars, ranks) -> dict:
    num = kernel_numerator(model, pair, k)[k]
    out = {}
    for (ex, ey), c in num.items():
        e = [0] * nvars
        e[i] += ex
        e[j] += ey
        out[tuple(e)] = c
    return out


def _expand_over_difference(num: dict, i: int, j: int, r: int, nvars: int, ranks, cap: int) -> LaurentBlock:
    """num / (z_i^r - z_j^r) expanded per ordering, terms of weight <= cap."""
    if ranks[i] < ranks[j]:
        big, small, sign = i, j, 1
    else:
        big, small, sign = j, i, -1
    step = r * (ranks[small] - ranks[big])
    out: dict = {}
    for e, c in num.items():
        base = list(e)
        base[big] -= r
        w0 = sum(rk * x for rk, x in zip(ranks, base))
        if w0 > cap:
            continue
        nterms = (cap - w0) // step + 1
        cc = c if sign == 1 else -c
        for l in range(nterms):
            ee = list(base)
            ee[big] -= r * l
            ee[small] += r * l
            key = tuple(ee)
            if key in out:
                out[key] = out[key] + cc
            else:
                out[key] = cc
    return LaurentBlock(nvars, out, tuple(ranks), cap)


def _min_weight_numerator(model, pair, k, i, j, nvars, ranks) -> int:
    num = _numerator_block(model, pair, k, i, j, nvars, ranks)
    big = i if ranks[i] < ranks[j] else j
    best = None
    for e in num:
        ee = list(e)
        ee[big] -= model.r
        w = sum(rk * x for rk, x in zip(ranks, ee))
        best = w if best is None else min(best, w)
    return best if best is not None else 10**9


def kernel(model: WaveModel, pair, i: int, j: int, hbar_order: int, z_depth: int | None = None,
           nvars: int | None = None, ranks: Sequence[int] | None = None) -> KernelSeries:
    """Kernel in variables (z_i, z_j) up to hbar^hbar_order (0-based indices).

    ``z_depth`` is the number of geometric terms kept for the leading numerator
    term; the weighted cap is derived from it.
    """
    if i == j:
        raise ValueError("kernel needs two distinct variables")
    pair = normalize_pair(model, pair)
    nvars = nvars if nvars is not None else max(i, j) + 1
    ranks = tuple(ranks) if ranks is not None else default_ranks(nvars)
    depth = 8 if z_depth is None else z_depth
    if depth < 1:
        raise ValueError("z_depth must be >= 1")
    blocks = []
    for k in range(hbar_order + 1):
        w0 = _min_weight_numerator(model, pair, k, i, j, nvars, ranks)
        num = _numerator_block(model, pair, k, i, j, nvars, ranks)
        wmax = max(sum(rk * x for rk, x in zip(ranks, e)) for e in num) - model.r * min(ranks[i], ranks[j])
        cap = wmax + model.r * abs(ranks[i] - ranks[j]) * (depth - 1)
        cap = max(cap, w0)
        blocks.append(_expand_over_difference(num, i, j, model.r, nvars, ranks, cap))
    return KernelSeries(model, pair, (i, j), HbarSeries.from_list(blocks, hbar_order))


# ------------------------------------------------------ cyclic structure


def cyclic_permutations(n: int) -> list[tuple[int, ...]]:
    """All n-cycles as successor tuples sigma (sigma[i] = image of i)."""
    if n == 1:
        return [(0,)]
    out = []
    for rest in itertools.permutations(range(1, n)):
        cyc = (0,) + rest
        sigma = [0] * n
        for a, b in zip(cyc, cyc[1:] + (0,)):
            sigma[a] = b
        out.append(tuple(sigma))
    return out


def compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


# ---------------------------------------------------------- series engine


class _BlockCache:
    """Reduced kernel blocks keyed by (pair, i, j, k); re-truncated on demand."""

    def __init__(self, model: WaveModel, nvars: int, ranks):
        self.model, self.nvars, self.ranks = model, nvars, tuple(ranks)
        self.blocks: dict = {}
        self.minw: dict = {}

    def min_weight(self, pair, i, j, k) -> int:
        key = (pair, i, j, k)
        if key not in self.minw:
            self.minw[key] = _min_weight_numerator(self.model, pair, k, i, j, self.nvars, self.ranks)
        return self.minw[key]

    def block(self, pair, i, j, k, cap) -> LaurentBlock:
        key = (pair, i, j, k)
        got = self.blocks.get(key)
        if got is not None and got.cap >= cap:
            return got if got.cap == cap else got.with_cap(cap)
        num = _numerator_block(self.model, pair, k, i, j, self.nvars, self.ranks)
        blk = _expand_over_difference(num, i, j, self.model.r, self.nvars, self.ranks, cap)
        self.blocks[key] = blk
        return blk


def _cyclic_sum_series(model, n, order, cap, ranks, special=None, special_pair=None, cache=None) -> LaurentBlock:
    """(-1)^(n-1) sum_sigma prod_i K(z_i, z_sigma(i)) at hbar^order, weights <= cap."""
    cache = cache or _BlockCache(model, n, ranks)
    base = normalize_pair(model, ("+", "-"))
    total = LaurentBlock(n, {}, tuple(ranks), cap)
    for sigma in cyclic_permutations(n):
        pairs = [special_pair if (special is not None and v == special) else base for v in range(n)]
        for comp in compositions(order, n):
            mins = [cache.min_weight(pairs[v], v, sigma[v], comp[v]) for v in range(n)]
            if sum(mins) > cap:
                continue
            prod = None
            rest = sum(mins)
            for v in range(n):
                rest -= mins[v]
                fcap = cap - rest - (0 if prod is None else 0)
                if prod is None:
                    blk = cache.block(pairs[v], v, sigma[v], comp[v], cap - rest)
                    prod = blk
                else:
                    blk = cache.block(pairs[v], v, sigma[v], comp[v], cap - rest - prod.min_weight() if prod.terms else cap)
                    prod = prod.mul(blk, cap=cap - rest)
                if not prod.terms:
                    break
            if prod is not None and prod.terms:
                total = total + prod.with_cap(cap)
    if (n - 1) % 2:
        total = -total
    return total


@dataclass
class CorrelatorPoly:
    """Coefficients of W_{g,n} keyed by (d-tuple, a-tuple).

    The stored value is the coefficient of prod_i x_i^-(d_i + a_i/r + 1).
    """

    model: WaveModel
    g: int
    n: int
    coeffs: dict = field(default_factory=dict)

    def d_constraint(self, d, a) -> bool:
        m = self.model
        if m.kind == "airy":
            return sum(d) == 3 * self.g - 3 + self.n
        if m.kind == "bessel":
            return sum(d) == self.g - 1
        return m.r * sum(d) + sum(a) == (m.r + 1) * (2 * self.g - 2 + self.n)

    def is_symmetric(self) -> bool:
        for (d, a), c in self.coeffs.items():
            for perm in itertools.permutations(range(self.n)):
                key = (tuple(d[p] for p in perm), tuple(a[p] for p in perm))
                if self.coeffs.get(key, 0) != c:
                    return False
        return True

    def intersection_numbers(self) -> dict:
        return {key: extract_intersection(self, key[0], key[1]) for key in self.coeffs}

    def to_json(self) -> dict:
        from .exact import encode_scalar

        return {
            "model": self.model.name,
            "g": self.g,
            "n": self.n,
            "coeffs": [
                {"d": list(d), "a": list(a), "coeff": encode_scalar(c), "intersection": encode_scalar(extract_intersection(self, d, a))}
                for (d, a), c in sorted(self.coeffs.items())
            ],
        }


def _exp_to_da(model: WaveModel, e_full: int):
    """Full z-exponent -> (d, a), or None if not in the admissible set."""
    r = model.r
    m = -e_full - r  # = r d + a
    if m < 1:
        return None
    d, a = divmod(m, r)
    if a == 0:
        return None
    return d, a


def _reduced_box_ok(model, e_red: Sequence[int]) -> bool:
    r = model.r
    return all(_exp_to_da(model, e - (r - 1)) is not None for e in e_red)


def _cap_for_box(total: int, n: int, ranks, guard: int) -> int:
    """Largest weight of a reduced exponent vector with all e_i <= -2 and sum total."""
    top = min(range(n), key=lambda v: ranks[v])
    w = sum(ranks[v] * (-2) for v in range(n) if v != top)
    w += ranks[top] * (total + 2 * (n - 1))
    return w + guard


def _correlator_total_degree(model: WaveModel, g: int, n: int) -> int:
    """Sum of reduced exponents of W_{g,n} (n >= 2 cyclic product)."""
    order = 2 * g - 2 + n
    # each kernel order k contributes -step*k, each kernel has degree -1 + (r-1) - (r-1) ... computed from numerators
    deg0 = -model.r + (model.r - 1)  # N_0 has degree r-1 (after reduction) minus r from the difference
    return n * deg0 - model.step * order


def correlator(model: WaveModel, g: int, n: int, ranks: Sequence[int] | None = None, guard: int | None = None,
               method: str = "auto") -> CorrelatorPoly:
    """Exact W_{g,n} as a coefficient table, certified polynomial and symmetric."""
    if 2 * g - 2 + n <= 0:
        raise ValueError("need 2g - 2 + n > 0")
    if n == 1:
        return _one_point_poly(model, g)
    if method == "auto":
        method = "series" if n <= 3 else "interp"
    if method == "interp":
        from .interp import correlator_by_interpolation

        return correlator_by_interpolation(model, g, n)
    if method == "two_point":
        return two_point_poly(model, g)
    ranks = tuple(ranks) if ranks is not None else default_ranks(n)
    order = 2 * g - 2 + n
    total = _correlator_total_degree(model, g, n)
    guard = model.r * n * max(ranks) if guard is None else guard
    cap = _cap_for_box(total, n, ranks, guard)
    blk = _cyclic_sum_series(model, n, order, cap, ranks)
    poly = CorrelatorPoly(model, g, n)
    r = model.r
    for e, c in blk.terms.items():
        if sum(e) != total:
            raise PipelineError("inhomogeneous term in correlator")
        if not _reduced_box_ok(model, e):
            raise PipelineError(f"non-polynomial or inadmissible term {e} in W_{g},{n}: truncation too shallow?")
        da = [_exp_to_da(model, x - (r - 1)) for x in e]
        d = tuple(t[0] for t in da)
        a = tuple(t[1] for t in da)
        poly.coeffs[(d, a)] = c
    for (d, a) in poly.coeffs:
        if not poly.d_constraint(d, a):
            raise PipelineError("degree constraint violated")
    if not poly.is_symmetric():
        raise PipelineError("correlator is not symmetric")
    return poly


# ------------------------------------------------------------ one point


def _one_point_terms(model, sector, order):
    comps = []
    for coef, shift, la, lb in _trace_terms(model, sector):
        comps.append((coef, shift, component(model, la, order), component(model, lb, order)))
    return comps


def _one_point_order(model: WaveModel, sector, K: int):
    """(z-exponent, coefficient) of hbar^(K-1) in W_1 (sector None) or in the n = 1 minor."""
    acc = None
    exps = set()
    for coef, shift, la, lb in _trace_terms(model, sector):
        ca = component(model, la, 1)
        cb = component(model, lb, 1)
        e = ca.zexp + cb.zexp + shift - model.step * K
        if e.denominator != 1:
            raise PipelineError("fractional exponent in the one-point function")
        exps.add(int(e))
        val = _CONV.conv(model, la, lb, K) * coef
        acc = val if acc is None else acc + val
    if len(exps) != 1:
        raise PipelineError("one-point terms are not homogeneous")
    return exps.pop(), acc * _norm(model)


def _one_point_cached(model: WaveModel, sector, order: int) -> tuple:
    return tuple(_one_point_order(model, sector, K) for K in range(order + 1))


def one_point_series(model: WaveModel, order: int) -> list:
    """[(hbar power p, z-exponent, coefficient)] of W_1 for p = -1 .. order - 1."""
    data = _one_point_cached(model, None, order)
    return [(K - 1, e, c) for K, (e, c) in enumerate(data)]


def one_point_minor_series(model: WaveModel, sector, order: int) -> list:
    """[(k, z-exponent, coefficient)] of the n = 1 minor W^(sector)_{k,1}, k <= order - 1."""
    data = _one_point_cached(model, sector, order)
    e0, c0 = data[0]
    if c0:
        raise PipelineError("n = 1 minor has a nonzero hbar^-1 term")
    return [(K - 1, e, c) for K, (e, c) in enumerate(data) if K >= 1]


def _one_point_poly(model: WaveModel, g: int) -> CorrelatorPoly:
    e, c = _one_point_order(model, None, 2 * g)
    poly = CorrelatorPoly(model, g, 1)
    da = _exp_to_da(model, e)
    if da is None:
        if c:
            raise PipelineError("one-point function has inadmissible support")
        return poly
    if c:
        poly.coeffs[((da[0],), (da[1],))] = c
    for (d, a) in poly.coeffs:
        if not poly.d_constraint(d, a):
            raise PipelineError("degree constraint violated")
    return poly


# ------------------------------------------------------------- extraction


def intersection_normalization(model: WaveModel, g: int, d: Sequence[int], a: Sequence[int]):
    """Factor N with coefficient(W_{g,n}) = N * <tau_d ...>."""
    n = len(d)
    if _r2(model):
        df = 1
        for di in d:
            df *= r_factorial(2 * di + 1, 2)
        return Fraction(df, 2**n) / Fraction(-2) ** (2 * g - 2 + n)
    r = model.r
    prod = 1
    for di, ai in zip(d, a):
        prod *= r_factorial(r * di + ai, r)
    return Fraction(-r) ** (g - 1 - sum(d)) * Fraction(prod, r**n)


def extract_intersection(poly: CorrelatorPoly, d: Sequence[int], a: Sequence[int] | None = None):
    """Intersection number read off a correlator table (exact)."""
    d = tuple(d)
    if a is None:
        if poly.model.kind == "rairy":
            raise ValueError("r-spin extraction needs the a-tuple")
        a = (1,) * len(d)
    a = tuple(a)
    if len(d) != poly.n or len(a) != poly.n:
        raise ValueError("tuple length does not match n")
    if not poly.d_constraint(d, a):
        raise ValueError(f"degree constraint fails for d={d}, a={a} at g={poly.g}")
    c = poly.coeffs.get((d, a), 0)
    val = c / intersection_normalization(poly.model, poly.g, d, a)
    if isinstance(val, Cyclotomic):
        q = val.rational_value()
        if q is None:
            raise PipelineError("intersection number is not rational")
        return q
    return Fraction(val)


def intersection_number(model: WaveModel, d: Sequence[int], a: Sequence[int] | None = None):
    """<tau_d1 ... tau_dn> (with a-labels for r-spin), computed from W_{g,n}."""
    from . import cache as _cache

    d = tuple(d)
    n = len(d)
    if model.kind == "airy":
        tot = sum(d) - n + 3
        if tot % 3:
            return Fraction(0)
        g = tot // 3
        a = (1,) * n
    elif model.kind == "bessel":
        g = sum(d) + 1
        a = (1,) * n
    else:
        from .exact import rspin_genus

        if a is None:
            raise ValueError("r-spin numbers need the a-tuple")
        a = tuple(a)
        try:
            g = rspin_genus(model.r, d, a)
        except ValueError:
            return Fraction(0)
    if g < 0 or 2 * g - 2 + n <= 0:
        return Fraction(0)
    hit = _cache.lookup(model.name, g, n, d, a)
    if hit is not None:
        return hit
    if n == 1:
        poly = _one_point_poly(model, g)
    elif n == 2 and _r2(model):
        poly = two_point_poly(model, g)
    else:
        poly = correlator(model, g, n)
    val = extract_intersection(poly, d, a)
    _cache.store(model.name, g, n, d, a, val)
    return val


# ------------------------------------------------------- two point (fast)


class _IntegerConvolver:
    """Convolutions sum_{a+b=s} coeff_a(X) coeff_b(Y) of two components.

    Sequences are scaled to integers over a common denominator so that long
    convolutions avoid repeated gcd work; root-of-unity twists are grouped by
    residue.  Results (prefactors included) are memoised per total s.
    """

    def __init__(self):
        self.scaled: dict = {}
        self.memo: dict = {}

    def _scaled(self, model, label, need):
        got = self.scaled.get((model, label))
        if got is not None and len(got[0]) > need:
            return got
        order = 64
        while order <= need:
            order *= 2
        comp = component(model, label, order)
        den = 1
        for c in comp.seq:
            den = math.lcm(den, c.denominator)
        ints = [int(c * den) for c in comp.seq]
        got = (ints, den, comp)
        self.scaled[(model, label)] = got
        return got

    def conv(self, model, la, lb, s: int):
        key = (model, la, lb, s)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        A, da, ca = self._scaled(model, la, s)
        B, db, cb = self._scaled(model, lb, s)
        if ca.field is None or (ca.twist == 0 and cb.twist == 0):
            acc = 0
            for a in range(s + 1):
                acc += A[a] * B[s - a]
            val = ca.prefactor * cb.prefactor * Fraction(acc, da * db)
        else:
            N = ca.field
            groups: dict[int, int] = {}
            for a in range(s + 1):
                t = (ca.twist * a + cb.twist * (s - a)) % N
                groups[t] = groups.get(t, 0) + A[a] * B[s - a]
            val = ca.prefactor * cb.prefactor * Cyclotomic.from_powers(
                N, {t: Fraction(v, da * db) for t, v in groups.items()}
            )
        self.memo[key] = val
        return val


_CONV = _IntegerConvolver()


def two_point_poly(model: WaveModel, g: int) -> CorrelatorPoly:
    """W_{g,2} for the r = 2 models by exact univariate division.

    W_2 = N(z1,z2) N(z2,z1) / (z1^2 - z2^2)^2 with N the reduced kernel numerator; at a
    fixed hbar-order the numerator is homogeneous, so the division is one-variable.
    """
    if not _r2(model):
        return correlator(model, g, 2, method="series")
    K = 2 * g
    step = model.step
    norm2 = _norm(model) ** 2
    terms = _kernel_terms(model, ("+", "-"))
    num: dict[int, Fraction] = {}
    deg = None
    for c1, x1, y1 in terms:  # K(z1, z2): x1 at z1, y1 at z2
        for c2, x2, y2 in terms:  # K(z2, z1): x2 at z2, y2 at z1
            e1base = component(model, x1, 1).zexp + component(model, y2, 1).zexp + 1
            e2base = component(model, y1, 1).zexp + component(model, x2, 1).zexp + 1
            for s in range(K + 1):
                a = _CONV.conv(model, x1, y2, s)
                b = _CONV.conv(model, y1, x2, K - s)
                if not a or not b:
                    continue
                e1 = int(e1base - step * s)
                e2 = int(e2base - step * (K - s))
                if deg is None:
                    deg = e1 + e2
                num[e2] = num.get(e2, 0) + c1 * c2 * a * b
    poly = CorrelatorPoly(model, g, 2)
    num = {e: c * norm2 for e, c in num.items() if c}
    if not num:
        return poly
    # divide by (z1^2 - z2^2)^2 = z1^4 (1 - t^2)^2 with t = z2/z1; the quotient must be exact
    lo, hi = min(num), max(num)
    quo = _divide_by_one_minus_t2_sq([num.get(e, Fraction(0)) for e in range(lo, hi + 1)])
    total = deg - 4
    for idx, c in enumerate(quo):
        if not c:
            continue
        e2 = lo + idx
        e1 = total - e2
        # the cycle sign (-1)^(n-1) cancels the sign of (z2^2 - z1^2); reduced frame shift z^-(r-1)
        da1 = _exp_to_da(model, e1 - 1)
        da2 = _exp_to_da(model, e2 - 1)
        if da1 is None or da2 is None:
            raise PipelineError("two-point function has inadmissible support")
        poly.coeffs[((da1[0], da2[0]), (1, 1))] = c
    return poly


def _divide_by_one_minus_t2_sq(coeffs: list) -> list:
    """Exact quotient of a polynomial by (1 - t^2)^2; raises if inexact."""
    c = list(coeffs)
    # divide by (1 - t^2) twice
    for _ in range(2):
        n = len(c)
        if n < 3:
            if any(c):
                raise PipelineError("inexact division in the two-point function")
            return []
        q = [Fraction(0)] * (n - 2)
        rem = list(c)
        # (1 - t^2) q = c ; solve from the top: -q[m] t^(m+2) leading
        for m in range(n - 3, -1, -1):
            q[m] = -rem[m + 2]
            rem[m + 2] += q[m]
            rem[m] -= q[m]
        if any(rem):
            raise PipelineError("inexact division in the two-point function")
        c = q
    return c


# ---------------------------------------------------------------- minors


@dataclass
class MinorSeries:
    """One-instanton minor W^(sector, i)_{k,n}: reduced Laurent blocks per k.

    The full minor is prod_j z_j^-(r-1) times the stored block.
    """

    model: WaveModel
    n: int
    special_index: int
    sector: object
    blocks: list

    def order(self) -> int:
        return len(self.blocks) - 1


def special_pair(model: WaveModel, sector) -> tuple:
    if _r2(model):
        return ("-", "-") if sector == "+" else ("+", "+")
    return (int(sector), "-")


def base_pair(model: WaveModel, sector) -> tuple:
    if _r2(model):
        return ("+", "-") if sector == "+" else ("-", "+")
    return ("+", "-")


def minor(model: WaveModel, sector, i: int, n: int, hbar_order: int, ranks: Sequence[int] | None = None,
          cap_extra: int = 0) -> MinorSeries:
    """Series expansion of the minors W^(sector, i)_{k,n} for k <= hbar_order.

    For n = 1 the minor comes from the trace formula and is a single monomial per k.
    Blocks are truncated at a weight cap that keeps every term needed to
    recover the polynomial numerator (see :func:`minor_numerator`).
    """
    if not 0 <= i < n:
        raise ValueError("special index out of range")
    if n == 1:
        data = one_point_minor_series(model, sector, hbar_order + 1)
        blocks = []
        for k, e, c in data:
            blocks.append(LaurentBlock(1, {(e + model.r - 1,): c}))
        return MinorSeries(model, 1, 0, sector, blocks)
    ranks = tuple(ranks) if ranks is not None else default_ranks(n)
    sp = special_pair(model, sector)
    bp = base_pair(model, sector)
    blocks = []
    cache = _BlockCache(model, n, ranks)
    for k in range(hbar_order + 1):
        cap = _minor_cap(model, k, n, i, ranks) + cap_extra
        blk = _cyclic_sum_custom(model, n, k, cap, ranks, i, sp, bp, cache)
        blocks.append(blk)
    return MinorSeries(model, n, i, sector, blocks)


def _cyclic_sum_custom(model, n, order, cap, ranks, special, sp, bp, cache) -> LaurentBlock:
    total = LaurentBlock(n, {}, tuple(ranks), cap)
    for sigma in cyclic_permutations(n):
        pairs = [sp if v == special else bp for v in range(n)]
        for comp in compositions(order, n):
            mins = [cache.min_weight(pairs[v], v, sigma[v], comp[v]) for v in range(n)]
            if sum(mins) > cap:
                continue
            prod = None
            rest = sum(mins)
            for v in range(n):
                rest -= mins[v]
                if prod is None:
                    prod = cache.block(pairs[v], v, sigma[v], comp[v], cap - rest)
                else:
                    blk = cache.block(pairs[v], v, sigma[v], comp[v], cap - rest - prod.min_weight())
                    prod = prod.mul(blk, cap=cap - rest)
                if not prod.terms:
                    break
            if prod is not None and prod.terms:
                total = total + prod.with_cap(cap)
    if (n - 1) % 2:
        total = -total
    return total


def _minor_denominator(model: WaveModel, sector, i: int, n: int, ranks) -> LaurentBlock:
    """prod_{j != i} (z_i - z_j)(c z_i - z_j) with c = -1 (r = 2) or zeta^alpha."""
    if _r2(model):
        c = Fraction(-1)
        one = Fraction(1)
    else:
        N = model.field
        c = Cyclotomic.root(N, int(sector) * N // model.r)
        one = Cyclotomic.one(N)
    poly = LaurentBlock(n, {(0,) * n: one}, tuple(ranks), None)
    for j in range(n):
        if j == i:
            continue
        ei = [0] * n
        ei[i] = 1
        ej = [0] * n
        ej[j] = 1
        f1 = LaurentBlock(n, {tuple(ei): one, tuple(ej): -one}, tuple(ranks), None)
        f2 = LaurentBlock(n, {tuple(ei): c * one if _r2(model) else c, tuple(ej): -one}, tuple(ranks), None)
        poly = poly.mul(f1).mul(f2)
    return poly


def _minor_support(model, k, n, i):
    """Reduced-frame exponent box of numerator = minor * denominator.

    For the prefactor of the polynomial part: reduced minor * denominator =
    C * z_i^(n-2-step k) ... times prod_{j!=i} u_j^(m_j), u_j = z_i/z_j, 0 <= m_j <= (r+1)k
    (r-Airy) or 3k (Airy) or k (Bessel); returns (base exponent, max m).
    """
    r = model.r
    mmax = {"airy": 3 * k, "bessel": k, "rairy": (r + 1) * k}[model.kind]
    base = [0] * n
    # minor ~ prod z^-(r-1) * z_i^(n-2-step k) / prod(...) * R ; reduced frame removes prod z^-(r-1)
    base[i] = n - 2 - model.step * k
    return base, mmax


def _minor_cap(model, k, n, i, ranks) -> int:
    base, mmax = _minor_support(model, k, n, i)
    # numerator exponents: base + sum_j m_j (e_i - e_j); weight maximised by m_j = 0 or mmax
    w = sum(rk * x for rk, x in zip(ranks, base))
    for j in range(n):
        if j == i:
            continue
        dw = ranks[i] - ranks[j]
        if dw > 0:
            w += dw * mmax
    # the denominator has minimal weight at most its own; add it back below
    den_min = 0
    for j in range(n):
        if j != i:
            den_min += 2 * min(ranks[i], ranks[j])
    return w - den_min + model.r * n * max(ranks)


def minor_numerator(model: WaveModel, sector, i: int, n: int, k: int, ranks: Sequence[int] | None = None) -> LaurentBlock:
    """Polynomial numerator: reduced minor at hbar^k times the pole denominator.

    Certifies that every term inside the weight cap lies in the predicted box.
    """
    ranks = tuple(ranks) if ranks is not None else default_ranks(n)
    ms = minor(model, sector, i, n, k, ranks)
    blk = ms.blocks[k]
    den = _minor_denominator(model, sector, i, n, ranks)
    prod = blk.mul(den.with_cap(None), cap=blk.cap + den.min_weight() if blk.cap is not None else None)
    # only trust weights up to blk.cap + min weight of the denominator
    trust = blk.cap + den.min_weight()
    base, mmax = _minor_support(model, k, n, i)
    out = {}
    for e, c in prod.terms.items():
        if prod.weight(e) > trust:
            continue
        ok = True
        ms_ = []
        for j in range(n):
            if j == i:
                continue
            m = -e[j] + base[j]
            if not 0 <= m <= mmax:
                ok = False
            ms_.append(m)
        if e[i] != base[i] + sum(ms_):
            ok = False
        if not ok:
            raise PipelineError(f"minor numerator has a term {e} outside the polynomial box")
        out[e] = c
    # the box must lie entirely below the trusted weight
    box_wmax = sum(rk * x for rk, x in zip(ranks, base)) + sum(
        max(0, (ranks[i] - ranks[j]) * mmax) for j in range(n) if j != i
    )
    if box_wmax > trust:
        raise PipelineError("weight cap too small to certify the minor numerator")
    return LaurentBlock(n, out, ranks, None)


def minor_value(model: WaveModel, sector, i: int, zs: Sequence, k: int):
    """Exact value of the reduced minor at hbar^k at numeric points z (no series).

    Uses a Held-Karp style sum over Hamiltonian cycles through all points.
    """
    n = len(zs)
    if n == 1:
        # one monomial per order; the raw series carries z^-(r-1) on top
        for kk, e, c in one_point_minor_series(model, sector, k + 1):
            if kk == k:
                return c * zs[0] ** (e + model.r - 1)
        return Fraction(0)
    sp = special_pair(model, sector)
    bp = base_pair(model, sector)
    return _cycle_sum_values(model, zs, k, i, sp, bp)


def correlator_value(model: WaveModel, zs: Sequence, order: int):
    """Reduced (-1)^(n-1) sum_sigma prod K at hbar^order at numeric points."""
    return _cycle_sum_values(model, zs, order, None, None, ("+", "-"))


def _cycle_sum_values(model, zs, order, special, sp, bp):
    n = len(zs)
    # kernel values per ordered pair and order
    kv = {}
    for a in range(n):
        for b in range(n):
            if a == b:
                continue
            pr = sp if a == special else bp
            kv[(a, b)] = [kernel_value(model, pr, k, zs[a], zs[b]) for k in range(order + 1)]
    zero = _zero(model)

    def add(u, v):
        return [x + y for x, y in zip(u, v)]

    def mul(u, v):
        out = [zero] * (order + 1)
        for p, x in enumerate(u):
            if not x:
                continue
            for q in range(order + 1 - p):
                y = v[q]
                if y:
                    out[p + q] = out[p + q] + x * y
        return out

    # dp[(mask, last)] = sum over paths 0 -> ... -> last through mask
    start = 0
    one = [_one(model)] + [zero] * order
    dp = {(1 << start, start): one}
    full = (1 << n) - 1
    for mask in range(1, full + 1):
        if not mask & 1:
            continue
        for last in range(n):
            key = (mask, last)
            if key not in dp:
                continue
            cur = dp[key]
            for nxt in range(n):
                if mask >> nxt & 1:
                    continue
                val = mul(cur, kv[(last, nxt)])
                nk = (mask | (1 << nxt), nxt)
                dp[nk] = val if nk not in dp else add(dp[nk], val)
    total = [zero] * (order + 1)
    for last in range(1, n):
        key = (full, last)
        if key in dp:
            total = add(total, mul(dp[key], kv[(last, start)]))
    res = total[order]
    return -res if (n - 1) % 2 else res


# ------------------------------------------------------------ transseries


def transseries_sector(model: WaveModel, I_plus: Iterable[int], I_minus: Iterable[int], n: int, hbar_order: int,
                       ranks: Sequence[int] | None = None):
    """Perturbative sector (returns the correlator blocks) or one-instanton sectors."""
    Ip, Im = set(I_plus), set(I_minus)
    if len(Ip) + len(Im) > 1:
        raise NotImplementedError("only sectors with |I+| + |I-| <= 1 are supported")
    if Ip:
        return minor(model, "+" if _r2(model) else 1, Ip.pop(), n, hbar_order, ranks)
    if Im:
        if not _r2(model):
            raise NotImplementedError("negative sectors of r-Airy follow from the parity relation")
        return minor(model, "-", Im.pop(), n, hbar_order, ranks)
    ranks = tuple(ranks) if ranks is not None else default_ranks(n)
    if n == 1:
        data = one_point_series(model, hbar_order)
        blocks = [LaurentBlock(1, {(e + model.r - 1,): c}) for _, e, c in data]
        return MinorSeries(model, 1, 0, None, blocks)
    blocks = []
    for k in range(hbar_order + 1):
        g2 = k - n + 2
        if g2 < 0 or g2 % 2:
            blocks.append(LaurentBlock(n, {}, ranks, None))
            continue
        total = _correlator_total_degree(model, g2 // 2, n)
        cap = _cap_for_box(total, n, ranks, model.r * n * max(ranks))
        blocks.append(_cyclic_sum_series(model, n, k, cap, ranks))
    return MinorSeries(model, n, None, None, blocks)


# ------------------------------------------------------------------ ODE


def ode_check_w1(model: WaveModel, order: int, perturb: int | None = None) -> bool:
    """W1''' - 4x W1' + 2 hbar W1 = 0 with f' = hbar d/dx f, up to hbar^order.

    W1 = sum_p c_p hbar^p x^(e_p / 2) (Airy).  ``perturb`` flips the sign of
    the coefficient with that hbar power (negative control).
    """
    if model.kind != "airy":
        raise ValueError("the third-order equation is specific to the Airy model")
    if order < 2:
        raise ValueError("order must be >= 2")
    data = one_point_series(model, order + 4)
    terms: dict[tuple[int, Fraction], Fraction] = {}
    for p, e, c in data:
        if c:
            val = -c if perturb is not None and p == perturb else c
            terms[(p, Fraction(e, 2))] = terms.get((p, Fraction(e, 2)), 0) + val

    def deriv(tt):
        out = {}
        for (p, s), c in tt.items():
            if s == 0:
                continue
            key = (p + 1, s - 1)
            out[key] = out.get(key, 0) + c * s
        return out

    d1 = deriv(terms)
    d3 = deriv(deriv(d1))
    res: dict = {}
    for (p, s), c in d3.items():
        res[(p, s)] = res.get((p, s), 0) + c
    for (p, s), c in d1.items():
        res[(p, s + 1)] = res.get((p, s + 1), 0) - 4 * c
    for (p, s), c in terms.items():
        res[(p + 1, s)] = res.get((p + 1, s), 0) + 2 * c
    return all(c == 0 for (p, s), c in res.items() if p <= order)


# ------------------------------------------- partial-fraction identities


def cyclic_sum_sides(zs: Sequence, tau_z1):
    """Both sides of the cyclic-sum identity with an arbitrary value tau(z_1)."""
    n = len(zs)
    lhs = 0
    for sigma in cyclic_permutations(n):
        term = Fraction(1) / (zs[sigma[0]] - tau_z1)
        for i in range(1, n):
            term /= zs[i] - zs[sigma[i]]
        lhs += term
    rhs = (zs[0] - tau_z1) ** (n - 2) if n >= 2 else Fraction(1) / (zs[0] - tau_z1)
    if n >= 2:
        for i in range(1, n):
            rhs /= (zs[0] - zs[i]) * (tau_z1 - zs[i])
    return lhs, rhs


def sine_weighted_sides(zs: Sequence, r: int, alpha: int, g: int, dps: int = 30):
    """Both sides of the sine-weighted residue identity (complex, mpmath)."""
    import mpmath

    with mpmath.workdps(dps):
        n = len(zs)
        zeta = mpmath.expjpi(mpmath.mpf(2) / r)
        zh = mpmath.expjpi(mpmath.mpf(alpha) / r)  # zeta^(alpha/2)
        za = zeta**alpha
        zm = zeta ** (-alpha)
        D = (r + 1) * (2 * g - 2 + n)
        z = [mpmath.mpf(x.numerator) / x.denominator if isinstance(x, Fraction) else mpmath.mpf(x) for x in zs]
        lhs = mpmath.mpc(0)
        for i in range(n):
            p1 = mpmath.mpc(1)
            p2 = mpmath.mpc(1)
            for j in range(n):
                if j != i:
                    p1 *= (z[i] - z[j]) * (za * z[i] - z[j])
                    p2 *= (z[i] - z[j]) * (zm * z[i] - z[j])
            t1 = zh * (1 - za) ** (-2 * g) / p1
            t2 = (1 / zh) * (1 - zm) ** (-2 * g) / p2
            lhs += (t1 - t2) * z[i] ** (-D + n - 2)
        lhs /= mpmath.pi * 1j
        s = mpmath.sin(mpmath.pi * alpha / r)
        pref = (-1) ** (g - 1 + alpha * n) * mpmath.mpf(2) ** n / (2 * mpmath.pi * s) / (2 * s) ** (2 * g - 2 + n)
        acc = mpmath.mpf(0)
        for ks in compositions(D, n):
            t = mpmath.mpf(1)
            for ki, zi in zip(ks, z):
                t *= mpmath.sin(mpmath.pi * alpha * ki / r) / zi ** (ki + 1)
                if t == 0:
                    break
            acc += t
        return lhs, pref * acc
