"""Partitions and symmetric polynomials in a fixed number of variables.

Bases: monomial ``m``, elementary ``e``, complete homogeneous ``h`` and the
shifted elementary bases ``ehat`` (e_s evaluated at u_i - 1) and ``echeck``
(e_s evaluated at u_i + 1).  Monomial keys are partitions padded with zeros to
length n; e/h/shifted keys are multisets of generator indices (each <= n), so
their length is not tied to n.

Coefficients may be Fractions, cyclotomic numbers or sympy expressions; only
ring operations are used.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Mapping, Sequence

from .exact import Cyclotomic, falling_factorial, field_order

__all__ = [
    "Partition",
    "SymPoly",
    "basis_convert",
    "brute_m_times_h",
    "brute_weighted_m_times_h",
    "dual_m_times_h_coeff",
    "distinct_permutations",
    "elementary_in_monomials",
    "h_r_alpha",
    "m_times_h_coeff",
    "monomial_value",
    "partitions",
    "sine_weight",
    "weighted_m_times_h_coeff",
    "weighted_m_times_h_total",
]

BASES = ("m", "e", "h", "ehat", "echeck")


# ------------------------------------------------------------- partitions


@dataclass(frozen=True, order=True)
class Partition:
    """Weakly decreasing tuple of nonnegative integers (zero parts allowed)."""

    parts: tuple[int, ...]

    def __post_init__(self):
        parts = tuple(int(p) for p in self.parts)
        if any(p < 0 for p in parts):
            raise ValueError("parts must be nonnegative")
        object.__setattr__(self, "parts", tuple(sorted(parts, reverse=True)))

    @classmethod
    def of(cls, parts: Iterable[int], n: int | None = None) -> "Partition":
        parts = sorted((int(p) for p in parts), reverse=True)
        if n is not None:
            nz = [p for p in parts if p]
            if len(nz) > n:
                raise ValueError(f"partition {parts} has more than {n} nonzero parts")
            parts = nz + [0] * (n - len(nz))
        return cls(tuple(parts))

    def padded(self, n: int) -> "Partition":
        return Partition.of(self.parts, n)

    def stripped(self) -> "Partition":
        return Partition(tuple(p for p in self.parts if p))

    @property
    def n(self) -> int:
        return len(self.parts)

    @property
    def weight(self) -> int:
        return sum(self.parts)

    @property
    def length(self) -> int:
        """Number of nonzero parts."""
        return sum(1 for p in self.parts if p)

    @property
    def largest(self) -> int:
        return self.parts[0] if self.parts else 0

    def multiplicity(self, k: int) -> int:
        return sum(1 for p in self.parts if p == k)

    def multiplicities(self) -> dict[int, int]:
        return dict(Counter(self.parts))

    @property
    def z(self) -> int:
        """Automorphism factor prod_k p_k! (zero parts included)."""
        out = 1
        for c in Counter(self.parts).values():
            out *= math.factorial(c)
        return out

    def conjugate(self) -> "Partition":
        nz = [p for p in self.parts if p]
        if not nz:
            return Partition(())
        return Partition(tuple(sum(1 for p in nz if p > i) for i in range(nz[0])))

    def __iter__(self):
        return iter(self.parts)

    def __len__(self):
        return len(self.parts)

    def __getitem__(self, i):
        return self.parts[i]

    def __repr__(self):
        return f"Partition{self.parts}"


def partitions(weight: int, n: int | None = None, max_part: int | None = None) -> Iterator[Partition]:
    """Partitions of ``weight`` with at most n nonzero parts (padded to n when given)."""
    top = weight if max_part is None else min(weight, max_part)

    def rec(rem, cap, acc):
        if rem == 0:
            yield acc
            return
        if n is not None and len(acc) >= n:
            return
        for p in range(min(rem, cap), 0, -1):
            yield from rec(rem - p, p, acc + [p])

    for parts in rec(weight, top, []):
        yield Partition.of(parts, n) if n is not None else Partition(tuple(parts))


def distinct_permutations(parts: Sequence[int]) -> Iterator[tuple[int, ...]]:
    """Distinct rearrangements of a tuple (multiset permutations)."""
    items = sorted(parts)
    n = len(items)

    def rec(counter, acc):
        if len(acc) == n:
            yield tuple(acc)
            return
        for v in sorted(counter):
            if counter[v]:
                counter[v] -= 1
                acc.append(v)
                yield from rec(counter, acc)
                acc.pop()
                counter[v] += 1

    yield from rec(Counter(items), [])


def monomial_value(lam: Partition, point: Sequence):
    """m_lambda evaluated at a point (len(point) variables)."""
    n = len(point)
    lam = lam.padded(n)
    acc = 0
    for perm in distinct_permutations(lam.parts):
        t = 1
        for x, e in zip(point, perm):
            if e:
                t = t * x**e
        acc = acc + t
    return acc


# ----------------------------------------------------------- SymPoly


def _is_zero(c) -> bool:
    if isinstance(c, Cyclotomic):
        return c.is_zero()
    try:
        import sympy

        if isinstance(c, sympy.Basic):
            return sympy.expand(c) == 0
    except ImportError:  # pragma: no cover
        pass
    return c == 0


@dataclass
class SymPoly:
    """Symmetric polynomial in n variables in one of the supported bases."""

    n: int
    basis: str
    coeffs: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.basis not in BASES:
            raise ValueError(f"unknown basis {self.basis}")
        clean = {}
        for lam, c in dict(self.coeffs).items():
            lam = lam if isinstance(lam, Partition) else Partition(tuple(lam))
            if self.basis == "m":
                lam = lam.padded(self.n)
            else:
                lam = lam.stripped()
                if lam.largest > self.n:
                    raise ValueError(f"generator index {lam.largest} exceeds n={self.n}")
            if not _is_zero(c):
                clean[lam] = clean[lam] + c if lam in clean else c
        self.coeffs = {k: v for k, v in clean.items() if not _is_zero(v)}

    def __add__(self, other: "SymPoly") -> "SymPoly":
        if (other.n, other.basis) != (self.n, self.basis):
            raise ValueError("SymPoly mismatch")
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out[k] + v if k in out else v
        return SymPoly(self.n, self.basis, out)

    def __neg__(self):
        return SymPoly(self.n, self.basis, {k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, s) -> "SymPoly":
        return SymPoly(self.n, self.basis, {k: v * s for k, v in self.coeffs.items()})

    def equals(self, other: "SymPoly") -> bool:
        if (other.n, other.basis) != (self.n, self.basis):
            return False
        return not (self - other).coeffs

    def map_coeffs(self, f) -> "SymPoly":
        return SymPoly(self.n, self.basis, {k: f(v) for k, v in self.coeffs.items()})

    def degree(self) -> int:
        if not self.coeffs:
            return -1
        return max(l.weight for l in self.coeffs)

    def homogeneous_part(self, d: int) -> "SymPoly":
        if self.basis not in ("m", "e", "h"):
            raise ValueError("homogeneous parts need a graded basis")
        return SymPoly(self.n, self.basis, {k: v for k, v in self.coeffs.items() if k.weight == d})

    def evaluate(self, point: Sequence):
        if len(point) != self.n:
            raise ValueError("point has the wrong number of variables")
        m = basis_convert(self, "m") if self.basis != "m" else self
        acc = 0
        for lam, c in m.coeffs.items():
            acc = acc + c * monomial_value(lam, point)
        return acc

    def __repr__(self):
        items = ", ".join(f"{k.parts}: {v}" for k, v in sorted(self.coeffs.items()))
        return f"SymPoly(n={self.n}, {self.basis}, {{{items}}})"


# --------------------------------------------------------- conversions


@lru_cache(maxsize=None)
def elementary_in_monomials(lam: Partition, n: int) -> dict:
    """e_lambda = sum_nu N(lambda, nu) m_nu; N counts 0-1 matrices with row sums
    lambda and column sums nu (independent of n once nu is zero padded)."""
    parts = [p for p in lam.parts if p]
    state: dict[tuple[int, ...], int] = {(0,) * n: 1}
    for p in parts:
        if p > n:
            return {}
        new: dict[tuple[int, ...], int] = {}
        for expo, c in state.items():
            for cols in itertools.combinations(range(n), p):
                e = list(expo)
                for j in cols:
                    e[j] += 1
                key = tuple(e)
                new[key] = new.get(key, 0) + c
        state = new
    out = {}
    for expo, c in state.items():
        if list(expo) == sorted(expo, reverse=True):
            out[Partition(expo)] = c
    return out


@lru_cache(maxsize=None)
def complete_in_monomials(lam: Partition, n: int) -> dict:
    """h_lambda in the monomial basis (nonnegative integer matrices)."""
    parts = [p for p in lam.parts if p]
    state: dict[tuple[int, ...], int] = {(0,) * n: 1}
    for p in parts:
        new: dict[tuple[int, ...], int] = {}
        for expo, c in state.items():
            for comp in _compositions(p, n):
                key = tuple(a + b for a, b in zip(expo, comp))
                new[key] = new.get(key, 0) + c
        state = new
    out = {}
    for expo, c in state.items():
        if list(expo) == sorted(expo, reverse=True):
            out[Partition(expo)] = c
    return out


def _compositions(total, parts):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _shift_to_e(s: int, n: int, shift: int) -> dict:
    """e_s(u + shift) = sum_j C(n - j, s - j) shift^(s - j) e_j(u)."""
    return {j: math.comb(n - j, s - j) * shift ** (s - j) for j in range(s + 1)}


def _generator_expand(lam: Partition, n: int, table) -> dict:
    """Product over parts of linear combinations of generators; keys are multisets."""
    acc: dict[tuple[int, ...], object] = {(): 1}
    for p in lam.parts:
        if not p:
            continue
        lin = table(p)
        new: dict = {}
        for key, c in acc.items():
            for j, cj in lin.items():
                if _is_zero(cj):
                    continue
                nk = tuple(sorted(key + ((j,) if j else ()), reverse=True))
                v = c * cj
                new[nk] = new[nk] + v if nk in new else v
        acc = new
    return {Partition(k): v for k, v in acc.items() if not _is_zero(v)}


def _to_e(p: SymPoly) -> SymPoly:
    n = p.n
    if p.basis == "e":
        return p
    if p.basis in ("ehat", "echeck"):
        shift = -1 if p.basis == "ehat" else 1
        out: dict = {}
        for lam, c in p.coeffs.items():
            for mu, v in _generator_expand(lam, n, lambda s: _shift_to_e(s, n, shift)).items():
                out[mu] = out[mu] + c * v if mu in out else c * v
        return SymPoly(n, "e", out)
    if p.basis == "m":
        return _monomial_to_e(p)
    if p.basis == "h":
        return _monomial_to_e(_to_m(p))
    raise ValueError(p.basis)


def _from_e(p: SymPoly, target: str) -> SymPoly:
    n = p.n
    if target == "e":
        return p
    if target in ("ehat", "echeck"):
        # e_j(u) = e_j((u - shift) + shift)
        shift = 1 if target == "ehat" else -1
        out: dict = {}
        for lam, c in p.coeffs.items():
            for mu, v in _generator_expand(lam, n, lambda s: _shift_to_e(s, n, shift)).items():
                out[mu] = out[mu] + c * v if mu in out else c * v
        return SymPoly(n, target, out)
    if target == "m":
        return _to_m(p)
    if target == "h":
        return _monomial_to_h_exact(_to_m(p))
    raise ValueError(target)


def _to_m(p: SymPoly) -> SymPoly:
    n = p.n
    if p.basis == "m":
        return p
    if p.basis in ("ehat", "echeck"):
        return _to_m(_to_e(p))
    expand = elementary_in_monomials if p.basis == "e" else complete_in_monomials
    out: dict = {}
    for lam, c in p.coeffs.items():
        for mu, v in expand(lam, n).items():
            out[mu] = out[mu] + c * v if mu in out else c * v
    return SymPoly(n, "m", out)


def _monomial_to_e(p: SymPoly) -> SymPoly:
    """Peel off the lexicographically largest monomial with e_{lambda'}."""
    n = p.n
    rest = dict(p.coeffs)
    out: dict = {}
    while rest:
        lam = max(rest)
        c = rest[lam]
        conj = lam.conjugate()
        out[conj] = out[conj] + c if conj in out else c
        for mu, v in elementary_in_monomials(conj, n).items():
            nv = rest.get(mu, 0) - c * v
            if _is_zero(nv):
                rest.pop(mu, None)
            else:
                rest[mu] = nv
    return SymPoly(n, "e", out)


@lru_cache(maxsize=None)
def _e_in_h_table(s: int) -> tuple:
    """e_s as a polynomial in h's: sum_{i=0}^{s} (-1)^i e_{s-i} h_i = 0 recursively."""
    if s == 0:
        return ((Partition(()), 1),)
    acc: dict[Partition, int] = {}
    # e_s = sum_{i=1}^{s} (-1)^(i-1) h_i e_{s-i}
    for i in range(1, s + 1):
        for lam, c in _e_in_h_table(s - i):
            key = Partition(tuple(lam.parts) + (i,))
            acc[key] = acc.get(key, 0) + (-1) ** (i - 1) * c
    return tuple((k, v) for k, v in acc.items() if v)


def _e_to_h(p: SymPoly) -> SymPoly:
    out: dict = {}
    for lam, c in p.coeffs.items():
        prod: dict = {Partition(()): 1}
        for part in lam.parts:
            new: dict = {}
            for mu, v in prod.items():
                for nu, w in _e_in_h_table(part):
                    key = Partition(tuple(mu.parts) + tuple(nu.parts))
                    new[key] = new.get(key, 0) + v * w
            prod = new
        for mu, v in prod.items():
            out[mu] = out[mu] + c * v if mu in out else c * v
    return SymPoly(p.n, "h", out)


def basis_convert(p: SymPoly, target: str) -> SymPoly:
    """Exact change of basis between m, e, h, ehat (u - 1) and echeck (u + 1)."""
    if target not in BASES:
        raise ValueError(f"unknown basis {target}")
    if p.basis == target:
        return p
    if target == "h":
        m = _to_m(p)
        return _monomial_to_h_exact(m)
    if p.basis == "h":
        p = _to_m(p)
    if target == "m":
        return _to_m(p)
    return _from_e(_to_e(p), target)


def _monomial_to_h_exact(p: SymPoly) -> SymPoly:
    """m -> e -> h, degree by degree (h_lambda with parts <= n)."""
    n = p.n
    by_deg: dict[int, dict] = {}
    for lam, c in p.coeffs.items():
        by_deg.setdefault(lam.weight, {})[lam] = c
    out: dict = {}
    for d, part in by_deg.items():
        # e_s with s <= n only involves h_1..h_s, so the h-form stays inside the basis
        e_form = _monomial_to_e(SymPoly(n, "m", part))
        h_form = _e_to_h(e_form)
        for lam, c in h_form.coeffs.items():
            out[lam] = out[lam] + c if lam in out else c
    return SymPoly(n, "h", out)


# ------------------------------------------------ coefficient extraction


def _mults(parts: Sequence[int]) -> Counter:
    return Counter(parts)


def m_times_h_coeff(n: int, mu, nu):
    """M_{n,mu,nu}: coefficient of u^mu in m_nu * h_{|mu|-|nu|} (closed product).

    Works with integer n or a sympy symbol; ``mu`` may also be a mapping of
    multiplicities {m: p_m} (then n must be given and may be symbolic).
    """
    nu = Partition.of(nu, n) if isinstance(n, int) else Partition(tuple(nu))
    if isinstance(mu, Mapping):
        pmu = dict(mu)
    else:
        mu = Partition.of(mu, n) if isinstance(n, int) else Partition(tuple(mu))
        if mu.weight < nu.weight:
            return 0
        pmu = _mults(mu.parts)
    pnu = _mults(p for p in nu.parts if p)
    top = nu.largest
    out = 1
    z = 1
    for k in range(1, top + 1):
        pk = pnu.get(k, 0)
        if not pk:
            continue
        z *= math.factorial(pk)
        base = n - sum(pmu.get(i, 0) for i in range(k)) - sum(pnu.get(j, 0) for j in range(k + 1, top + 1))
        out = out * falling_factorial(base, pk)
    if isinstance(out, int):
        return Fraction(out, z)
    return out / z


def dual_m_times_h_coeff(n: int, mu, nu) -> Fraction:
    """The covering-count form of M_{n,mu,nu}, summing over parts of mu instead."""
    mu = Partition.of(mu, n)
    nu = Partition.of(nu, n)
    if mu.weight < nu.weight:
        return Fraction(0)
    pmu = _mults(mu.parts)
    pnu = _mults(nu.parts)
    top = nu.largest
    out = 1
    for k in range(0, top + 1):
        if k < top:
            pt = pmu.get(k, 0)
        else:
            pt = sum(c for m, c in pmu.items() if m >= top)
        base = sum(pnu.get(i, 0) for i in range(k + 1)) - sum(pmu.get(j, 0) for j in range(k))
        out *= falling_factorial(base, pt)
    return Fraction(out, nu.z)


def brute_m_times_h(n: int, mu, nu) -> int:
    """Count distinct rearrangements nu' of nu with nu' <= mu entrywise."""
    mu = Partition.of(mu, n).parts
    nu = Partition.of(nu, n).parts
    return sum(1 for perm in distinct_permutations(nu) if all(a <= b for a, b in zip(perm, mu)))


# ---------------------------------------------------- weighted (r-spin)


def sine_weight(k: int, r: int, alpha: int) -> Cyclotomic:
    """sin(alpha k pi / r) as an element of Q(zeta_N), N = lcm(2r, 4)."""
    N = field_order(r)
    e = (N // (2 * r)) * alpha * k
    i_inv = Cyclotomic.root(N, (-N // 4) % N)
    return (Cyclotomic.root(N, e % N) - Cyclotomic.root(N, (-e) % N)) * i_inv * Fraction(1, 2)


def h_r_alpha(D: int, r: int, alpha: int, n: int, as_coeff_of: Sequence[int]) -> Cyclotomic:
    """Coefficient prod_i sin(alpha k_i pi / r) of u^k in h_D^(r,alpha)."""
    if not 1 <= alpha <= r - 1:
        raise ValueError("alpha must lie in 1..r-1")
    if D < 0:
        raise ValueError("D must be >= 0")
    k = tuple(as_coeff_of)
    if len(k) != n:
        raise ValueError("exponent tuple must have n entries")
    if any(x < 0 for x in k) or sum(k) != D:
        raise ValueError(f"exponents {k} do not sum to D={D}")
    out = Cyclotomic.one(field_order(r))
    for x in k:
        out = out * sine_weight(x, r, alpha)
    return out


def weighted_m_times_h_coeff(n: int, mu, nu, r: int, alpha: int, A: Sequence[int]) -> Fraction:
    """Joint-multiplicity count M^(r,alpha)_{n,mu,nu}(A).

    ``A`` is aligned with the zero-padded, decreasing ``nu``: part nu_i must land
    on a position p with mu_p >= nu_i and <mu_p> = <nu_i> + A_i (residues mod r).
    Returns (number of such bijections) / z_nu.  ``alpha`` enters only the sine
    weights and is accepted for interface symmetry.
    """
    del alpha
    mu = Partition.of(mu, n).parts
    nu = Partition.of(nu, n).parts
    A = tuple(A)
    if len(A) != n:
        raise ValueError("A must have n entries")
    if any(not -(r - 1) <= a <= r - 1 for a in A):
        raise ValueError("offsets must lie in -(r-1)..r-1")
    # group slots by (part, target residue)
    need: Counter = Counter()
    for k, a in zip(nu, A):
        t = k % r + a
        if not 0 <= t < r:
            return Fraction(0)
        need[(k, t)] += 1
    out = 1
    used: Counter = Counter()  # target residue -> slots consumed by larger parts
    for k in sorted({k for k, _ in need}, reverse=True):
        for t in range(r):
            c = need.get((k, t), 0)
            if not c:
                continue
            cand = sum(1 for m in mu if m >= k and m % r == t)
            out *= falling_factorial(cand - used[t], c)
            if out == 0:
                return Fraction(0)
        for t in range(r):
            used[t] += need.get((k, t), 0)
    return Fraction(out, Partition(nu).z)


def weighted_m_times_h_total(n: int, mu, nu, r: int, alpha: int) -> Cyclotomic:
    """Coefficient of u^mu in m_nu h^(r,alpha)_{|mu|-|nu|} via the offset sum."""
    mu_p = Partition.of(mu, n).parts
    nu_p = Partition.of(nu, n).parts
    N = field_order(r)
    total = Cyclotomic.zero(N)
    if sum(mu_p) < sum(nu_p):
        return total
    ranges = [range(-(k % r), r - (k % r)) for k in nu_p]
    sines = {a: sine_weight(a, r, alpha) for a in range(-(r - 1), r)}
    for A in itertools.product(*ranges):
        M = weighted_m_times_h_coeff(n, mu_p, nu_p, r, alpha, A)
        if not M:
            continue
        w = Cyclotomic.rational(N, M)
        for a in A:
            w = w * sines[a]
        total = total + w
    q = sum(m // r for m in mu_p) - sum(k // r for k in nu_p)
    return total if (alpha * q) % 2 == 0 else -total


def brute_weighted_m_times_h(n: int, mu, nu, r: int, alpha: int) -> Cyclotomic:
    """Termwise expansion of m_nu h^(r,alpha) at the monomial u^mu."""
    mu_p = Partition.of(mu, n).parts
    nu_p = Partition.of(nu, n).parts
    N = field_order(r)
    total = Cyclotomic.zero(N)
    for perm in distinct_permutations(nu_p):
        if all(a <= b for a, b in zip(perm, mu_p)):
            w = Cyclotomic.one(N)
            for a, b in zip(perm, mu_p):
                w = w * sine_weight(b - a, r, alpha)
            total = total + w
    return total
