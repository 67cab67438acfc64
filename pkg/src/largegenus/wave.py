"""Formal WKB wave functions of the Airy, Bessel and r-Airy systems.

Every wave function is stored as a :class:`Component`

    prefactor * z^zexp * sum_k seq[k] * zeta_N^(twist*k) * hbar^k * z^(-step*k)

with z = x^(1/r).  The normalisation 1/sqrt(r) of each wave function is not
stored: it only enters through bilinear products, which carry 1/r.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .exact import Cyclotomic, field_order, rising_factorial
from .series import HbarSeries

__all__ = [
    "Component",
    "WaveCoefficients",
    "WaveModel",
    "AIRY",
    "BESSEL",
    "airy_coeffs",
    "bessel_coeffs",
    "rairy",
    "rairy_closure_residual",
    "rairy_coeffs",
    "wronskian_check",
]


@dataclass(frozen=True)
class WaveModel:
    """Airy (psi-classes), Bessel (Theta-classes) or r-Airy (r-spin)."""

    kind: str
    r: int = 2

    def __post_init__(self):
        if self.kind not in ("airy", "bessel", "rairy"):
            raise ValueError(f"unknown model kind {self.kind!r}")
        if self.kind != "rairy" and self.r != 2:
            raise ValueError("Airy and Bessel models have r = 2")
        if self.r < 2:
            raise ValueError("r must be >= 2")

    @property
    def r_eff(self) -> int:
        return self.r

    @property
    def step(self) -> int:
        """Power of z^-1 accompanying each power of hbar."""
        return {"airy": 3, "bessel": 1, "rairy": self.r + 1}[self.kind]

    @property
    def exponent(self) -> Fraction:
        """Power of x in the instanton action."""
        return Fraction(self.step, self.r)

    @property
    def field(self) -> int | None:
        """Cyclotomic order used for exact phases (None: rational model)."""
        return field_order(self.r) if self.kind == "rairy" else None

    @property
    def name(self) -> str:
        return self.kind if self.kind != "rairy" else f"rairy{self.r}"

    def sectors(self) -> tuple:
        """Sector labels of the one-instanton minors."""
        if self.kind == "rairy":
            return tuple(range(1, self.r))
        return ("+", "-")

    def action(self, sector) -> object:
        """Coefficient A of x^exponent in the action of a sector."""
        if self.kind == "airy":
            return Fraction(4, 3) if sector == "+" else Fraction(-4, 3)
        if self.kind == "bessel":
            return Fraction(4) if sector == "+" else Fraction(-4)
        r, N = self.r, self.field
        alpha = int(sector)
        if not 1 <= alpha <= r - 1:
            raise ValueError(f"sector must lie in 1..{r - 1}")
        return (Cyclotomic.one(N) - Cyclotomic.root(N, alpha * N // r)) * Fraction(r, r + 1)

    def actions(self) -> list:
        return [self.action(s) for s in self.sectors()]

    def stokes(self, sector) -> object:
        """Stokes constant of a sector, on the branch fixed by the r-spin checks."""
        if self.kind == "airy":
            return Fraction(1)
        if self.kind == "bessel":
            return Fraction(2)
        return rspin_stokes(self.r, int(sector))

    def stokes_list(self) -> list:
        return [self.stokes(s) for s in self.sectors()]

    def __str__(self):
        return self.name


AIRY = WaveModel("airy")
BESSEL = WaveModel("bessel")


def rairy(r: int) -> WaveModel:
    return WaveModel("rairy", r)


def rspin_stokes(r: int, alpha: int) -> Cyclotomic:
    """S_{r,alpha} = exp(i pi (alpha - r + 1)/2), principal branch.

    The branch was fixed by matching the leading large-genus coefficient to
    exact r-spin numbers for r = 3, 4, 5 (tests/test_rspin_asymptotics.py).
    """
    N = field_order(r)
    # exp(i pi q/2) = zeta_N^(N q / 4)
    return Cyclotomic.root(N, (N * (alpha - r + 1) // 4) % N)


# ----------------------------------------------------------- coefficients


@dataclass(frozen=True)
class WaveCoefficients:
    """Scalar coefficient tables of a model up to a given hbar order.

    For Airy/Bessel: ``table = (psi_seq, dpsi_seq)``; for r-Airy
    ``table[m][k] = a_k^(m)`` for m = 0..r-1.
    """

    model: WaveModel
    order: int
    table: tuple

    def to_json(self) -> dict:
        from .exact import frac_to_str

        if self.model.kind == "rairy":
            tab = {f"m={m}": [frac_to_str(c) for c in row] for m, row in enumerate(self.table)}
        else:
            tab = {"psi": [frac_to_str(c) for c in self.table[0]], "dpsi": [frac_to_str(c) for c in self.table[1]]}
        return {"model": self.model.name, "order": self.order, "table": tab}


@lru_cache(maxsize=None)
def _airy_seq(order: int) -> tuple[tuple[Fraction, ...], tuple[Fraction, ...]]:
    c = []
    for k in range(order + 1):
        c.append(Fraction(math.factorial(6 * k), 864**k * math.factorial(2 * k) * math.factorial(3 * k)))
    dc = [ck * Fraction(1 + 6 * k, 1 - 6 * k) for k, ck in enumerate(c)]
    return tuple(c), tuple(dc)


def airy_coeffs(order: int) -> WaveCoefficients:
    """c_k = (6k)!/(864^k (2k)! (3k)!) and the derivative row c_k (1+6k)/(1-6k)."""
    if order < 0:
        raise ValueError("order must be nonnegative")
    return WaveCoefficients(AIRY, order, _airy_seq(order))


@lru_cache(maxsize=None)
def _bessel_seq(order: int) -> tuple[tuple[Fraction, ...], tuple[Fraction, ...]]:
    half = Fraction(1, 2)
    b, db = [], []
    for k in range(order + 1):
        den = 2**k * math.factorial(k)
        b.append(Fraction(rising_factorial(half, k)) ** 2 / den)
        db.append(Fraction(rising_factorial(Fraction(3, 2), k) * rising_factorial(-half, k)) / den)
    return tuple(b), tuple(db)


def bessel_coeffs(order: int) -> WaveCoefficients:
    """((1/2)_k)^2/(2^k k!) and the row for psi' = x hbar d/dx psi."""
    if order < 0:
        raise ValueError("order must be nonnegative")
    return WaveCoefficients(BESSEL, order, _bessel_seq(order))


@lru_cache(maxsize=None)
def _rairy_table(r: int, order: int) -> tuple[tuple[Fraction, ...], ...]:
    a = [[Fraction(1)] * r]  # a[k][m]
    for k in range(1, order + 1):
        prev = a[k - 1]
        # partial sums S_m = sum_{j<=m} (k - 1/2 - j/(r+1)) a_{k-1}^{(j-1)}
        S = [Fraction(0)]
        for j in range(1, r + 1):
            S.append(S[-1] + (k - Fraction(1, 2) - Fraction(j, r + 1)) * prev[j - 1])
        assert S[r] == 0, "closure constraint violated at previous level"
        # next-level closure fixes a_k^(0)
        cs = [k + Fraction(1, 2) - Fraction(j, r + 1) for j in range(1, r + 1)]
        tot = sum(cs)
        assert tot == r * k and tot != 0, "singular closure solve"
        a0 = sum(c * S[j] for j, c in enumerate(cs)) / tot
        row = [a0 - S[m] for m in range(r)]
        a.append(row)
    return tuple(tuple(a[k][m] for k in range(order + 1)) for m in range(r))


def rairy_coeffs(r: int, order: int) -> WaveCoefficients:
    """Matrix a_k^(m) of the r-Airy wave functions (m = 0..r-1)."""
    if r < 2:
        raise ValueError("r must be >= 2")
    if order < 0:
        raise ValueError("order must be nonnegative")
    return WaveCoefficients(rairy(r), order, _rairy_table(r, order))


def rairy_closure_residual(r: int, order: int) -> list[Fraction]:
    """a_k^(0) - a_k^(r) for k <= order (a^(r) from one more recursion step)."""
    tab = _rairy_table(r, order)
    out = []
    for k in range(order + 1):
        ar = tab[r - 1][k]
        if k:
            ar -= (k - Fraction(1, 2) - Fraction(r, r + 1)) * tab[r - 1][k - 1]
        out.append(tab[0][k] - ar)
    return out


# ------------------------------------------------------------- components


@dataclass(frozen=True)
class Component:
    prefactor: object
    zexp: Fraction
    seq: tuple
    twist: int = 0
    field: int | None = None

    def coefficient(self, k: int):
        """Exact scalar multiplying hbar^k z^(zexp - step k)."""
        c = self.seq[k]
        if self.field is not None:
            t = (self.twist * k) % self.field
            return self.prefactor * Cyclotomic.from_powers(self.field, {t: c})
        return self.prefactor * c

    def flip(self) -> "Component":
        """hbar -> -hbar."""
        return Component(
            self.prefactor, self.zexp, tuple(c if k % 2 == 0 else -c for k, c in enumerate(self.seq)), self.twist, self.field
        )


@lru_cache(maxsize=None)
def component(model: WaveModel, label: tuple, order: int) -> Component:
    """Wave-function component by label.

    Airy/Bessel labels: ("psi", s) and ("dpsi", s) with s in {+1, -1}.
    r-Airy labels: ("psi", alpha, m) and ("phi", alpha, m) (phi = psi at -hbar).
    """
    if model.kind in ("airy", "bessel"):
        kind, s = label
        base, dbase = (_airy_seq if model.kind == "airy" else _bessel_seq)(order)
        lam = Fraction(3, 2) if model.kind == "airy" else Fraction(1, 2)
        lam *= s
        if kind == "psi":
            seq = tuple(c * lam**k for k, c in enumerate(base))
            return Component(Fraction(1), Fraction(-1, 2), seq)
        if kind == "dpsi":
            seq = tuple(c * lam**k for k, c in enumerate(dbase))
            return Component(Fraction(s), Fraction(1, 2), seq)
        raise ValueError(f"bad label {label}")
    r, N = model.r, model.field
    kind, alpha, m = label
    if not 1 <= alpha <= r or not 0 <= m < r:
        raise ValueError(f"bad r-Airy label {label}")
    tab = _rairy_table(r, order)[m]
    lam = Fraction(r + 1, r)
    seq = [c * lam**k for k, c in enumerate(tab)]
    if kind == "phi":
        seq = [c if k % 2 == 0 else -c for k, c in enumerate(seq)]
    elif kind != "psi":
        raise ValueError(f"bad label {label}")
    # (-1)^((r-alpha+2)/2) zeta_r^(alpha (m + 1/2))
    e_sign = (N * (r - alpha + 2)) // 4
    e_zeta = (N // (2 * r)) * alpha * (2 * m + 1)
    pref = Cyclotomic.root(N, (e_sign + e_zeta) % N)
    twist = (-(N // r) * alpha) % N
    return Component(pref, Fraction(-(r - 1 - 2 * m), 2), tuple(seq), twist, N)


def component_series(comp: Component, order: int) -> HbarSeries:
    """Coefficients at z = 1 as an hbar-series."""
    return HbarSeries.from_list([comp.coefficient(k) for k in range(order + 1)], order)


# -------------------------------------------------------------- Wronskian


def wronskian_check(model: WaveModel, order: int) -> bool:
    """Wave-matrix determinant equals 1 + O(hbar^(order+1)) exactly."""
    if order < 1:
        raise ValueError("order must be >= 1")
    if model.kind in ("airy", "bessel"):
        pm = component_series(component(model, ("psi", -1), order), order)
        pp = component_series(component(model, ("psi", 1), order), order)
        dm = component_series(component(model, ("dpsi", -1), order), order)
        dp = component_series(component(model, ("dpsi", 1), order), order)
        det = (pm * dp - dm * pp).scale(Fraction(1, 2))
        return all(det.coeff(k) == (1 if k == 0 else 0) for k in range(order + 1))
    r, N = model.r, model.field
    entries = [[component_series(component(model, ("psi", alpha, m), order), order) for alpha in range(1, r + 1)] for m in range(r)]
    det = _series_det(entries, order, N)
    lead = det.coeff(0)
    # det of the unnormalised matrix must be r^(r/2) (each column carries 1/sqrt(r))
    if lead * lead != Cyclotomic.rational(N, Fraction(r) ** r):
        return False
    if complex(lead).real <= 0 or abs(complex(lead) - r ** (r / 2)) > 1e-9 * r ** (r / 2):
        return False
    return all(not det.coeff(k) for k in range(1, order + 1))


def _series_det(entries, order: int, N: int | None) -> HbarSeries:
    """Laplace expansion along rows with memoisation over column subsets."""
    n = len(entries)
    memo: dict[tuple[int, int], HbarSeries] = {}

    def rec(row: int, used: int) -> HbarSeries:
        if row == n:
            one = Cyclotomic.one(N) if N else Fraction(1)
            return HbarSeries.from_list([one], order)
        key = (row, used)
        if key in memo:
            return memo[key]
        acc = None
        for col in range(n):
            if used >> col & 1:
                continue
            # sign: number of unused columns before col
            before = sum(1 for c in range(col) if not used >> c & 1)
            term = entries[row][col] * rec(row + 1, used | (1 << col))
            if before % 2:
                term = -term
            acc = term if acc is None else acc + term
        memo[key] = acc
        return acc

    return rec(0, 0)
