"""Truncated hbar-series and sparse Laurent blocks.

A :class:`LaurentBlock` is a sparse Laurent polynomial in z_1..z_n.  Series
that come from expanding 1/(z_i^r - z_j^r) are truncated with a weighted
degree filtration: with ranks rank_j (1 for the variable of largest modulus)
the weight of z^e is omega(e) = sum_j rank_j e_j.  Every geometric step of an
expansion raises omega by a positive amount, so "omega <= cap" keeps finitely
many terms at fixed total degree and products of truncated factors are exact
below the cap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

import mpmath

from .exact import Cyclotomic, falling_factorial

__all__ = [
    "HbarSeries",
    "LaurentBlock",
    "SingularityDatum",
    "default_ranks",
    "invert_difference",
    "large_order_eval",
    "large_order_eval_gevrey2",
    "series_mul",
    "to_mpc",
]


def _is_zero(c) -> bool:
    if isinstance(c, LaurentBlock):
        return not c.terms
    return not c


# ------------------------------------------------------------------ hbar


@dataclass(frozen=True)
class HbarSeries:
    """sum_{m} coeffs[m] hbar^(m + offset), known up to hbar^(kmax)."""

    coeffs: tuple
    kmax: int
    offset: int = 0

    def __post_init__(self):
        keep = self.kmax - self.offset + 1
        cs = tuple(self.coeffs)[: max(keep, 0)]
        object.__setattr__(self, "coeffs", cs)

    @classmethod
    def from_list(cls, coeffs: Sequence, kmax: int | None = None, offset: int = 0) -> "HbarSeries":
        if kmax is None:
            kmax = offset + len(coeffs) - 1
        return cls(tuple(coeffs), kmax, offset)

    def __getitem__(self, power: int):
        if power > self.kmax:
            raise IndexError(f"hbar^{power} lies beyond the truncation order {self.kmax}")
        idx = power - self.offset
        if 0 <= idx < len(self.coeffs):
            return self.coeffs[idx]
        return None

    def coeff(self, power: int, zero=0):
        c = self[power]
        return zero if c is None else c

    def _aligned(self, other: "HbarSeries"):
        lo = min(self.offset, other.offset)
        hi = min(self.kmax, other.kmax)
        return lo, hi

    def __add__(self, other: "HbarSeries") -> "HbarSeries":
        lo, hi = self._aligned(other)
        out = []
        for p in range(lo, hi + 1):
            a, b = self[p], other[p]
            if a is None:
                out.append(b if b is not None else 0)
            elif b is None:
                out.append(a)
            else:
                out.append(a + b)
        return HbarSeries(tuple(out), hi, lo)

    def __neg__(self) -> "HbarSeries":
        return HbarSeries(tuple(-c for c in self.coeffs), self.kmax, self.offset)

    def __sub__(self, other: "HbarSeries") -> "HbarSeries":
        return self + (-other)

    def scale(self, s) -> "HbarSeries":
        return HbarSeries(tuple(c * s for c in self.coeffs), self.kmax, self.offset)

    def __mul__(self, other):
        if isinstance(other, HbarSeries):
            return series_mul(self, other)
        return self.scale(other)

    def flip(self) -> "HbarSeries":
        """hbar -> -hbar."""
        return HbarSeries(
            tuple(c if (m + self.offset) % 2 == 0 else -c for m, c in enumerate(self.coeffs)),
            self.kmax,
            self.offset,
        )

    def truncate(self, kmax: int) -> "HbarSeries":
        return HbarSeries(self.coeffs, min(kmax, self.kmax), self.offset)

    def equals(self, other: "HbarSeries", upto: int | None = None) -> bool:
        hi = min(self.kmax, other.kmax) if upto is None else upto
        lo = min(self.offset, other.offset)
        for p in range(lo, hi + 1):
            a, b = self[p], other[p]
            a = 0 if a is None else a
            b = 0 if b is None else b
            if isinstance(a, LaurentBlock) or isinstance(b, LaurentBlock):
                same = a.equals(b) if isinstance(a, LaurentBlock) and isinstance(b, LaurentBlock) else False
                if not same and not (_is_zero(a) and _is_zero(b)):
                    return False
            elif not _is_zero(a - b):
                return False
        return True


def series_mul(a: HbarSeries, b: HbarSeries, mul: Callable | None = None) -> HbarSeries:
    """Cauchy product truncated at the smaller absolute truncation order."""
    if mul is None:
        mul = lambda x, y: x * y  # noqa: E731
    off = a.offset + b.offset
    kmax = min(a.kmax + b.offset, b.kmax + a.offset)
    n = kmax - off + 1
    out = []
    for m in range(max(n, 0)):
        acc = None
        for i in range(m + 1):
            if i >= len(a.coeffs) or m - i >= len(b.coeffs):
                continue
            x, y = a.coeffs[i], b.coeffs[m - i]
            if _is_zero(x) or _is_zero(y):
                continue
            t = mul(x, y)
            acc = t if acc is None else acc + t
        out.append(0 if acc is None else acc)
    return HbarSeries(tuple(out), kmax, off)


# --------------------------------------------------------------- Laurent


def default_ranks(n: int) -> tuple[int, ...]:
    """Ranks for the ordering |z_1| > |z_2| > ... > |z_n|."""
    return tuple(range(1, n + 1))


@dataclass(frozen=True, eq=False)
class LaurentBlock:
    """Sparse Laurent polynomial; exponent tuples map to exact scalars.

    ``ranks`` records the expansion ordering (rank 1 = largest modulus) and
    ``cap`` the weighted-degree truncation (None for genuine polynomials).
    """

    nvars: int
    terms: Mapping[tuple[int, ...], object] = field(default_factory=dict)
    ranks: tuple[int, ...] | None = None
    cap: int | None = None

    def __post_init__(self):
        clean = {}
        for e, c in dict(self.terms).items():
            if len(e) != self.nvars:
                raise ValueError("exponent length does not match nvars")
            if not _is_zero(c):
                clean[tuple(e)] = c
        if self.ranks is None:
            object.__setattr__(self, "ranks", default_ranks(self.nvars))
        if self.cap is not None:
            clean = {e: c for e, c in clean.items() if self.weight(e) <= self.cap}
        object.__setattr__(self, "terms", clean)

    # structure
    def weight(self, e: Sequence[int]) -> int:
        return sum(r * x for r, x in zip(self.ranks, e))

    @property
    def degree_floor(self) -> tuple[int | None, ...]:
        """Smallest exponent of each variable present (None if empty)."""
        if not self.terms:
            return (None,) * self.nvars
        return tuple(min(e[j] for e in self.terms) for j in range(self.nvars))

    def min_weight(self) -> int | None:
        if not self.terms:
            return None
        return min(self.weight(e) for e in self.terms)

    def is_polynomial_mode(self) -> bool:
        return self.cap is None

    def _check(self, other: "LaurentBlock"):
        if not isinstance(other, LaurentBlock):
            raise TypeError("expected LaurentBlock")
        if other.nvars != self.nvars:
            raise ValueError(f"incompatible nvars {self.nvars} vs {other.nvars}")
        if other.ranks != self.ranks:
            raise ValueError("blocks use different expansion orderings")

    def _merged_cap(self, other):
        caps = [c for c in (self.cap, other.cap) if c is not None]
        return min(caps) if caps else None

    # arithmetic
    def __add__(self, other):
        if isinstance(other, int) and other == 0:
            return self
        self._check(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            if e in out:
                s = out[e] + c
                if _is_zero(s):
                    del out[e]
                else:
                    out[e] = s
            else:
                out[e] = c
        return LaurentBlock(self.nvars, out, self.ranks, self._merged_cap(other))

    __radd__ = __add__

    def __neg__(self):
        return LaurentBlock(self.nvars, {e: -c for e, c in self.terms.items()}, self.ranks, self.cap)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, s) -> "LaurentBlock":
        if _is_zero(s):
            return LaurentBlock(self.nvars, {}, self.ranks, self.cap)
        return LaurentBlock(self.nvars, {e: c * s for e, c in self.terms.items()}, self.ranks, self.cap)

    def __mul__(self, other):
        if isinstance(other, LaurentBlock):
            return self.mul(other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def mul(self, other: "LaurentBlock", cap: int | None = None) -> "LaurentBlock":
        """Product, dropping terms whose weight exceeds the effective cap."""
        self._check(other)
        caps = [c for c in (cap, self._merged_cap(other)) if c is not None]
        eff = min(caps) if caps else None
        if eff is None:
            out: dict = {}
            for e1, c1 in self.terms.items():
                for e2, c2 in other.terms.items():
                    e = tuple(a + b for a, b in zip(e1, e2))
                    if e in out:
                        out[e] = out[e] + c1 * c2
                    else:
                        out[e] = c1 * c2
            return LaurentBlock(self.nvars, out, self.ranks, None)
        w = self.weight
        b_sorted = sorted(((w(e), e, c) for e, c in other.terms.items()), key=lambda t: t[0])
        out = {}
        for e1, c1 in self.terms.items():
            w1 = w(e1)
            for w2, e2, c2 in b_sorted:
                if w1 + w2 > eff:
                    break
                e = tuple(a + b for a, b in zip(e1, e2))
                if e in out:
                    out[e] = out[e] + c1 * c2
                else:
                    out[e] = c1 * c2
        return LaurentBlock(self.nvars, out, self.ranks, eff)

    def shift(self, e0: Sequence[int]) -> "LaurentBlock":
        """Multiply by the monomial z^e0 (the cap moves with it)."""
        cap = None if self.cap is None else self.cap + self.weight(e0)
        return LaurentBlock(
            self.nvars,
            {tuple(a + b for a, b in zip(e, e0)): c for e, c in self.terms.items()},
            self.ranks,
            cap,
        )

    def with_cap(self, cap: int | None) -> "LaurentBlock":
        if cap is None:
            return LaurentBlock(self.nvars, self.terms, self.ranks, self.cap)
        new = cap if self.cap is None else min(cap, self.cap)
        return LaurentBlock(self.nvars, self.terms, self.ranks, new)

    def as_polynomial(self) -> "LaurentBlock":
        """Drop the truncation marker (caller certifies the support)."""
        return LaurentBlock(self.nvars, self.terms, self.ranks, None)

    def coefficient(self, e: Sequence[int], zero=0):
        e = tuple(e)
        if self.cap is not None and self.weight(e) > self.cap:
            raise ValueError("requested coefficient lies above the truncation cap")
        return self.terms.get(e, zero)

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def equals(self, other: "LaurentBlock") -> bool:
        if set(self.terms) != set(other.terms):
            return False
        return all(_is_zero(self.terms[e] - other.terms[e]) for e in self.terms)

    def permute(self, perm: Sequence[int]) -> "LaurentBlock":
        """Variable j of the result is variable perm[j] of self."""
        inv = [0] * self.nvars
        for j, p in enumerate(perm):
            inv[p] = j
        terms = {}
        for e, c in self.terms.items():
            ne = [0] * self.nvars
            for old, x in enumerate(e):
                ne[inv[old]] = x
            terms[tuple(ne)] = c
        ranks = tuple(self.ranks[p] for p in perm)
        return LaurentBlock(self.nvars, terms, ranks, self.cap)

    def evaluate(self, point: Sequence, one=1):
        acc = 0
        for e, c in self.terms.items():
            t = c
            for x, k in zip(point, e):
                if k:
                    t = t * (x**k)
            acc = acc + t
        return acc

    def map_coeffs(self, f) -> "LaurentBlock":
        return LaurentBlock(self.nvars, {e: f(c) for e, c in self.terms.items()}, self.ranks, self.cap)

    def __repr__(self):
        return f"LaurentBlock(nvars={self.nvars}, terms={len(self.terms)}, cap={self.cap})"


def invert_difference(
    i: int,
    j: int,
    depth: int,
    nvars: int | None = None,
    r: int = 1,
    ranks: Sequence[int] | None = None,
) -> LaurentBlock:
    """Geometric expansion of 1/(z_i^r - z_j^r), ``depth`` terms, 0-based indices.

    The expansion is in powers of (small/large)^r where the ordering is given
    by ``ranks`` (default |z_1| > |z_2| > ...).
    """
    if i == j:
        raise ValueError("invert_difference needs two distinct variables")
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    if nvars is None:
        nvars = max(i, j) + 1
    ranks = tuple(ranks) if ranks is not None else default_ranks(nvars)
    big, small, sign = (i, j, 1) if ranks[i] < ranks[j] else (j, i, -1)
    terms = {}
    for l in range(depth):
        e = [0] * nvars
        e[big] = -r * (l + 1)
        e[small] = r * l
        terms[tuple(e)] = Fraction(sign)
    return LaurentBlock(nvars, terms, ranks, None)


# ------------------------------------------------------------ large order


def to_mpc(x) -> mpmath.mpc:
    if isinstance(x, Cyclotomic):
        N = x.order
        val = mpmath.mpc(0)
        for j, q in enumerate(x.coeffs):
            if q:
                val += mpmath.mpf(q.numerator) / q.denominator * mpmath.expjpi(mpmath.mpf(2 * j) / N)
        return val
    if isinstance(x, Fraction):
        return mpmath.mpc(mpmath.mpf(x.numerator) / x.denominator)
    return mpmath.mpc(x)


@dataclass(frozen=True)
class SingularityDatum:
    """One Borel-plane singularity: action, Stokes constant, exponents, minor."""

    action: object
    stokes: object
    beta0: int = 0
    beta_i: int = 0
    minor_coeffs: tuple = ()

    def __post_init__(self):
        if to_mpc(self.action) == 0:
            raise ValueError("action must be nonzero")
        object.__setattr__(self, "minor_coeffs", tuple(self.minor_coeffs))


def large_order_eval(data: Sequence[SingularityDatum], m: int, K: int, dps: int | None = None) -> mpmath.mpc:
    """Truncated large-order formula for the m-th coefficient.

    Sum over singularities of (S/2pi) Gamma(M)/A^M sum_{k<=K} A^k phi_k/(M-1)^{(k)}
    with M = m + beta0 - beta_i; the Gamma/power ratio is formed in log space.
    """
    if not data:
        raise ValueError("no singularity data given")
    ctx_dps = dps if dps is not None else max(mpmath.mp.dps, 30)
    with mpmath.workdps(ctx_dps):
        total = mpmath.mpc(0)
        for dat in data:
            M = m + dat.beta0 - dat.beta_i
            if M - 1 < K:
                raise ValueError(f"need m + beta0 - beta_i - 1 >= K (got {M - 1} < {K})")
            if len(dat.minor_coeffs) < K + 1:
                raise ValueError("not enough minor coefficients for the requested K")
            A = to_mpc(dat.action)
            logA = mpmath.log(A)
            head = mpmath.exp(mpmath.loggamma(M) - M * logA)
            inner = mpmath.mpc(0)
            Ak = mpmath.mpc(1)
            for k in range(K + 1):
                phik = to_mpc(dat.minor_coeffs[k])
                inner += Ak * phik / falling_factorial(mpmath.mpf(M - 1), k)
                Ak *= A
            total += to_mpc(dat.stokes) / (2 * mpmath.pi) * head * inner
        return +total


def large_order_eval_gevrey2(data: Sequence[SingularityDatum], g: int, K: int, dps: int | None = None):
    """Gevrey-2 form: coefficient of hbar^(2g + beta0), i.e. m = 2g."""
    return large_order_eval(data, 2 * g, K, dps)
