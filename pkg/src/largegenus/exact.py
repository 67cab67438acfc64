"""Exact scalars: rationals, cyclotomic field elements and factorial helpers.

Rationals are plain :class:`fractions.Fraction`.  Cyclotomic numbers live in
Q(zeta_N) with zeta_N = exp(2 pi i / N) and are stored as residues modulo the
N-th cyclotomic polynomial, so equality (in particular equality with zero) is
decidable.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Union

import mpmath

__all__ = [
    "Cyclotomic",
    "InconsistentSystem",
    "Multiplicities",
    "Scalar",
    "as_fraction",
    "cyclo_embed",
    "cyclotomic_poly",
    "decode_scalar",
    "encode_scalar",
    "falling_factorial",
    "field_order",
    "frac_from_str",
    "frac_to_str",
    "rising_factorial",
    "r_factorial",
    "rspin_genus",
    "solve_exact",
    "zeta",
    "to_complex",
]


def r_factorial(m: int, r: int) -> int:
    """m (m-r) (m-2r) ... down to the least positive term."""
    if r < 2:
        raise ValueError(f"r must be >= 2, got {r}")
    if m <= 0:
        raise ValueError(f"r-factorial needs m >= 1, got {m}")
    out = 1
    while m > 0:
        out *= m
        m -= r
    return out


def falling_factorial(x, k: int):
    """x (x-1) ... (x-k+1); the empty product is 1."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    out = 1
    for j in range(k):
        out = out * (x - j)
    return out


def rising_factorial(x, k: int):
    out = 1
    for j in range(k):
        out = out * (x + j)
    return out


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, Cyclotomic):
        q = x.rational_value()
        if q is None:
            raise ValueError(f"{x} is not rational")
        return q
    raise TypeError(f"cannot convert {type(x).__name__} to Fraction")


def frac_to_str(q) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def frac_from_str(s: str) -> Fraction:
    return Fraction(s)


# ---------------------------------------------------------------- cyclotomic


@lru_cache(maxsize=None)
def cyclotomic_poly(N: int) -> tuple[int, ...]:
    """Integer coefficients of Phi_N, lowest degree first."""
    if N < 1:
        raise ValueError("order must be positive")
    # Phi_N = prod_{d | N} (x^d - 1)^{mu(N/d)}; do it with exact polynomial division.
    num = [1]
    den = [1]
    for d in range(1, N + 1):
        if N % d:
            continue
        mu = _mobius(N // d)
        if mu == 0:
            continue
        fac = [-1] + [0] * (d - 1) + [1]
        if mu == 1:
            num = _pmul(num, fac)
        else:
            den = _pmul(den, fac)
    quo = _pdiv_exact(num, den)
    return tuple(quo)


def _mobius(n: int) -> int:
    res, p = 1, 2
    while p * p <= n:
        if n % p == 0:
            n //= p
            if n % p == 0:
                return 0
            res = -res
        p += 1
    if n > 1:
        res = -res
    return res


def _pmul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _pdiv_exact(a, b):
    a = list(a)
    db = len(b) - 1
    q = [0] * (len(a) - db)
    for i in range(len(a) - 1, db - 1, -1):
        c = a[i] // b[-1]
        q[i - db] = c
        if c:
            for j, y in enumerate(b):
                a[i - db + j] -= c * y
    assert all(v == 0 for v in a[:db]), "inexact cyclotomic division"
    return q


@lru_cache(maxsize=None)
def _reduction_table(N: int) -> tuple[tuple[Fraction, ...], ...]:
    """Rows: x^j mod Phi_N for j = 0 .. 2 phi - 2 (and up to N - 1)."""
    phi = cyclotomic_poly(N)
    deg = len(phi) - 1
    top = max(2 * deg - 1, N)
    rows = []
    cur = [Fraction(0)] * deg
    cur[0] = Fraction(1)
    for _ in range(top):
        rows.append(tuple(cur))
        # multiply by x and reduce
        carry = cur[-1]
        nxt = [Fraction(0)] + cur[:-1]
        if carry:
            for j in range(deg):
                nxt[j] -= carry * phi[j]
        cur = nxt
    return tuple(rows)


def field_order(r: int) -> int:
    """Order of the cyclotomic field used for r-spin phases: lcm(2r, 4)."""
    return math.lcm(2 * r, 4)


@dataclass(frozen=True, eq=False)
class Cyclotomic:
    """Element of Q(zeta_N) reduced modulo Phi_N (coefficients lowest first)."""

    order: int
    coeffs: tuple[Fraction, ...] = field(default=())

    def __post_init__(self):
        deg = len(cyclotomic_poly(self.order)) - 1
        cs = tuple(Fraction(c) for c in self.coeffs)
        if len(cs) > deg:
            cs = _reduce(self.order, cs)
        elif len(cs) < deg:
            cs = cs + (Fraction(0),) * (deg - len(cs))
        object.__setattr__(self, "coeffs", cs)

    # constructors
    @classmethod
    def zero(cls, N: int) -> "Cyclotomic":
        return cls(N, ())

    @classmethod
    def one(cls, N: int) -> "Cyclotomic":
        return cls(N, (Fraction(1),))

    @classmethod
    def rational(cls, N: int, q) -> "Cyclotomic":
        return cls(N, (Fraction(q),))

    @classmethod
    def root(cls, N: int, k: int = 1) -> "Cyclotomic":
        """zeta_N ** k."""
        return cls.from_powers(N, {k % N: Fraction(1)})

    @classmethod
    def from_powers(cls, N: int, powers: Mapping[int, Fraction]) -> "Cyclotomic":
        """sum_j c_j zeta_N^j from a map j -> c_j (j taken mod N)."""
        rows = _reduction_table(N)
        deg = len(cyclotomic_poly(N)) - 1
        acc = [Fraction(0)] * deg
        for j, c in powers.items():
            if not c:
                continue
            row = rows[j % N]
            for t in range(deg):
                if row[t]:
                    acc[t] += c * row[t]
        return cls(N, tuple(acc))

    # arithmetic
    def _coerce(self, other) -> "Cyclotomic | None":
        if isinstance(other, Cyclotomic):
            if other.order != self.order:
                raise ValueError(f"mixing cyclotomic orders {self.order} and {other.order}")
            return other
        if isinstance(other, (int, Fraction)):
            return Cyclotomic(self.order, (Fraction(other),))
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Cyclotomic(self.order, tuple(a + b for a, b in zip(self.coeffs, o.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return Cyclotomic(self.order, tuple(-a for a in self.coeffs))

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Cyclotomic(self.order, tuple(a - b for a, b in zip(self.coeffs, o.coeffs)))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                return Cyclotomic.zero(self.order)
            return Cyclotomic(self.order, tuple(a * other for a in self.coeffs))
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        a, b = self.coeffs, o.coeffs
        prod = [Fraction(0)] * (2 * len(a) - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    if y:
                        prod[i + j] += x * y
        return Cyclotomic(self.order, _reduce(self.order, prod))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return Cyclotomic(self.order, tuple(a / other for a in self.coeffs))
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = Cyclotomic.one(self.order)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def inverse(self) -> "Cyclotomic":
        """Exact inverse by solving the multiplication-matrix system."""
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero cyclotomic element")
        q = self.rational_value()
        if q is not None:
            return Cyclotomic.rational(self.order, 1 / q)
        deg = len(self.coeffs)
        cols = []
        for j in range(deg):
            basis = [Fraction(0)] * deg
            basis[j] = Fraction(1)
            cols.append((self * Cyclotomic(self.order, tuple(basis))).coeffs)
        # matrix M with M[:, j] = cols[j]; solve M y = e_0
        mat = [[cols[j][i] for j in range(deg)] + [Fraction(int(i == 0))] for i in range(deg)]
        sol = _solve_augmented(mat)
        return Cyclotomic(self.order, tuple(sol))

    def conjugate(self) -> "Cyclotomic":
        """Complex conjugation zeta -> zeta^{-1}."""
        return Cyclotomic.from_powers(
            self.order, {(-j) % self.order: c for j, c in enumerate(self.coeffs) if c}
        )

    def galois(self, k: int) -> "Cyclotomic":
        """Automorphism zeta -> zeta^k (k coprime to the order)."""
        if math.gcd(k, self.order) != 1:
            raise ValueError("Galois exponent must be coprime to the order")
        return Cyclotomic.from_powers(
            self.order, {(j * k) % self.order: c for j, c in enumerate(self.coeffs) if c}
        )

    # predicates and conversion
    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __bool__(self):
        return not self.is_zero()

    def rational_value(self) -> Fraction | None:
        if any(self.coeffs[1:]):
            return None
        return self.coeffs[0]

    def __eq__(self, other):
        o = self._coerce(other) if isinstance(other, (Cyclotomic, int, Fraction)) else None
        if o is None:
            return NotImplemented
        return self.coeffs == o.coeffs

    def __hash__(self):
        q = self.rational_value()
        if q is not None:
            return hash(q)
        return hash((self.order, self.coeffs))

    def __complex__(self):
        return to_complex(self)

    def __repr__(self):
        terms = [f"{c}*z^{j}" for j, c in enumerate(self.coeffs) if c]
        return f"Cyclotomic[{self.order}](" + (" + ".join(terms) or "0") + ")"


def _reduce(N: int, coeffs) -> tuple[Fraction, ...]:
    rows = _reduction_table(N)
    deg = len(cyclotomic_poly(N)) - 1
    acc = [Fraction(0)] * deg
    for j, c in enumerate(coeffs):
        if not c:
            continue
        if j < deg:
            acc[j] += c
        else:
            row = rows[j]
            for t in range(deg):
                if row[t]:
                    acc[t] += c * row[t]
    return tuple(acc)


def _solve_augmented(mat):
    """Gauss-Jordan elimination over Fractions on an augmented square system."""
    n = len(mat)
    for col in range(n):
        piv = next((r for r in range(col, n) if mat[r][col] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular system")
        mat[col], mat[piv] = mat[piv], mat[col]
        p = mat[col][col]
        mat[col] = [v / p for v in mat[col]]
        for r in range(n):
            if r != col and mat[r][col] != 0:
                f = mat[r][col]
                mat[r] = [a - f * b for a, b in zip(mat[r], mat[col])]
    return [mat[r][n] for r in range(n)]


class InconsistentSystem(ValueError):
    """An overdetermined exact linear system has no solution."""


def solve_exact(rows, rhs):
    """Solve rows * X = rhs exactly over Q (rows may outnumber unknowns).

    ``rows`` is a list of Fraction vectors; ``rhs`` a list (one per row) of
    right-hand-side vectors, so several systems share one elimination.
    Raises :class:`InconsistentSystem` if the extra rows disagree and
    ZeroDivisionError if the unknowns are underdetermined.
    """
    if not rows:
        raise ValueError("empty system")
    nunk = len(rows[0])
    nrhs = len(rhs[0])
    mat = [[Fraction(v) for v in row] + [Fraction(v) for v in b] for row, b in zip(rows, rhs)]
    prow = 0
    pivots = []
    for col in range(nunk):
        piv = next((r for r in range(prow, len(mat)) if mat[r][col] != 0), None)
        if piv is None:
            raise ZeroDivisionError("underdetermined system")
        mat[prow], mat[piv] = mat[piv], mat[prow]
        p = mat[prow][col]
        if p != 1:
            mat[prow] = [v / p for v in mat[prow]]
        pr = mat[prow]
        for r in range(len(mat)):
            if r != prow:
                f = mat[r][col]
                if f:
                    mat[r] = [a - f * b if b else a for a, b in zip(mat[r], pr)]
        pivots.append(prow)
        prow += 1
    for r in range(prow, len(mat)):
        if any(mat[r][nunk:]):
            raise InconsistentSystem("extra equations are not satisfied")
    return [[mat[i][nunk + j] for j in range(nrhs)] for i in range(nunk)]


def zeta(N: int, k: int = 1) -> Cyclotomic:
    return Cyclotomic.root(N, k)


Scalar = Union[Fraction, int, Cyclotomic]


def to_complex(x) -> complex:
    if isinstance(x, Cyclotomic):
        N = x.order
        return complex(sum((float(c) * cmath.exp(2j * math.pi * j / N) for j, c in enumerate(x.coeffs) if c), 0j))
    return complex(x)


def cyclo_embed(c: Scalar, precision: int = 15):
    """Complex value of an exact scalar under zeta_N -> exp(2 pi i / N).

    Returns a Python complex when precision <= 15 and an mpmath mpc otherwise.
    """
    if precision < 15:
        raise ValueError("precision must be at least 15 digits")
    if precision == 15:
        return to_complex(c)
    with mpmath.workdps(precision + 5):
        if isinstance(c, Cyclotomic):
            N = c.order
            val = mpmath.mpc(0)
            for j, q in enumerate(c.coeffs):
                if q:
                    val += mpmath.mpf(q.numerator) / q.denominator * mpmath.expjpi(mpmath.mpf(2 * j) / N)
            return +val
        q = Fraction(c)
        return mpmath.mpc(mpmath.mpf(q.numerator) / q.denominator)


# ------------------------------------------------------------- serialization


def encode_scalar(x):
    if isinstance(x, Cyclotomic):
        return {"r": x.order, "coeffs": [frac_to_str(c) for c in x.coeffs]}
    return frac_to_str(Fraction(x))


def decode_scalar(obj):
    if isinstance(obj, dict):
        return Cyclotomic(int(obj["r"]), tuple(Fraction(c) for c in obj["coeffs"]))
    return Fraction(obj)


# ---------------------------------------------------------- multiplicities


@dataclass(frozen=True)
class Multiplicities:
    """Counts p_m = #{i : d_i = m} for an n-tuple of nonnegative integers."""

    n: int
    p: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        cleaned = tuple(sorted((int(m), int(c)) for m, c in dict(self.p).items() if c))
        if any(m < 0 or c < 0 for m, c in cleaned):
            raise ValueError("multiplicities must be nonnegative")
        if sum(c for _, c in cleaned) > self.n:
            raise ValueError("sum of multiplicities exceeds n")
        object.__setattr__(self, "p", cleaned)

    @classmethod
    def from_tuple(cls, d: Iterable[int]) -> "Multiplicities":
        d = list(d)
        counts: dict[int, int] = {}
        for v in d:
            counts[v] = counts.get(v, 0) + 1
        return cls(len(d), tuple(counts.items()))

    @classmethod
    def from_list(cls, n: int, plist: Iterable[int]) -> "Multiplicities":
        """From (p_0, p_1, ...) as given on the command line."""
        return cls(n, tuple((m, c) for m, c in enumerate(plist)))

    def __getitem__(self, m: int) -> int:
        return dict(self.p).get(m, 0)


def rspin_genus(r: int, d: Iterable[int], a: Iterable[int]) -> int:
    """Genus fixed by r|d| + |a| = (r+1)(2g-2+n); raises on inconsistent input."""
    d, a = list(d), list(a)
    if len(d) != len(a):
        raise ValueError("d and a must have the same length")
    if any(not 1 <= ai <= r - 1 for ai in a):
        raise ValueError(f"a_i must lie in 1..{r - 1}")
    if any(di < 0 for di in d):
        raise ValueError("d_i must be nonnegative")
    n = len(d)
    tot = r * sum(d) + sum(a)
    if tot % (r + 1):
        raise ValueError("degree r|d|+|a| is not divisible by r+1")
    chi = tot // (r + 1)
    if (chi - n + 2) % 2 or chi - n + 2 < 0:
        raise ValueError("no genus satisfies the degree constraint")
    return (chi - n + 2) // 2
