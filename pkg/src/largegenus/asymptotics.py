"""Subleading families, the coefficients alpha_k / beta_k / gamma_k and
truncated large-genus estimates.

Conventions
-----------
* A family member is indexed by its number of variables: ``family.at(n)`` is
  P_{k,n} (Q_{k,n}, R^(alpha)_{k,n}) in n variables, the polynomial that
  governs n-point intersection numbers.  It is extracted from the minor of the
  (n+1)-point correlator, see :func:`interp.subleading_poly`.
* For the r = 2 models polynomials live in the squared variables u_i^2, so a
  monomial key (2, 1) means u_1^4 u_2^2 symmetrised.
* ``alpha_k(k, p)`` takes the multiplicities of all n marked points; the point
  carrying the bulk of the degree simply has a large d and is not counted in
  any p_m with small m.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Sequence

import mpmath
import sympy

from .correlators import PipelineError, _r2, minor_value, one_point_minor_series
from .exact import (
    Cyclotomic,
    Multiplicities,
    cyclo_embed,
    decode_scalar,
    encode_scalar,
    field_order,
    rspin_genus,
)
from .interp import DEFAULT, InterpolationConfig, subleading_poly
from .symfun import (
    Partition,
    SymPoly,
    basis_convert,
    elementary_in_monomials,
    m_times_h_coeff,
    weighted_m_times_h_total,
)
from .wave import AIRY, BESSEL, WaveModel, rairy

__all__ = [
    "AsymptoticCoefficient",
    "Estimate",
    "FamilyConfig",
    "N",
    "SubleadingFamily",
    "alpha_k",
    "alpha_symbolic",
    "asymptotic_estimate",
    "beta_k",
    "beta_symbolic",
    "extend_family",
    "family",
    "family_bound",
    "gamma_k",
    "gamma_k_direct",
    "gamma_zero_closed_form",
    "rspin_family_member",
    "specialize",
    "u_polynomial",
]

N = sympy.Symbol("n")


@dataclass(frozen=True)
class FamilyConfig:
    """Which families are built on demand, and how far.

    ``max_k`` caps the closed-form families (seeds grow quickly with k: the
    psi family at k = 2 needs minors with seven points).  Fixed-n evaluation
    works beyond the cap via a single seed.
    """

    max_k: tuple[tuple[str, int], ...] = (("airy", 2), ("bessel", 3))
    interpolation: InterpolationConfig = DEFAULT

    def cap(self, kind: str) -> int:
        return dict(self.max_k).get(kind, -1)


DEFAULT_FAMILY = FamilyConfig()


# ------------------------------------------------------------- helpers


def family_bound(model: WaveModel, k: int) -> int:
    """Largest seed size (number of variables) needed before stabilisation.

    The degree in the squared variables is at most 3k - 1 for the Airy family
    and k - 1 for the Bessel family, so generator indices of the shifted
    elementary basis never exceed that.
    """
    if model.kind == "airy":
        return max(3 * k - 1, 0)
    if model.kind == "bessel":
        return max(k - 1, 0)
    raise ValueError("closed-form families exist for the r = 2 models only")


def specialize(p: SymPoly, value) -> SymPoly:
    """Set the last variable of a monomial-basis polynomial to ``value``."""
    if p.basis != "m":
        p = basis_convert(p, "m")
    if p.n == 0:
        raise ValueError("nothing to specialise")
    out: dict = {}
    for lam, c in p.coeffs.items():
        seen = set()
        for idx, t in enumerate(lam.parts):
            if t in seen:
                continue
            seen.add(t)
            rest = lam.parts[:idx] + lam.parts[idx + 1 :]
            key = Partition(rest)
            v = c * value**t if t else c
            out[key] = out[key] + v if key in out else v
    return SymPoly(p.n - 1, "m", out)


def _strip(lam: Partition) -> tuple[int, ...]:
    return tuple(x for x in lam.parts if x)


def _symbolic_binom(top, j: int):
    return sympy.ff(top, j) / math.factorial(j)


@lru_cache(maxsize=None)
def _ehat_symbolic(s: int) -> tuple:
    """ehat_s = sum_j C(n - j, s - j) (-1)^(s - j) e_j with n symbolic."""
    return tuple((j, sympy.expand(_symbolic_binom(N - j, s - j) * (-1) ** (s - j))) for j in range(s + 1))


@lru_cache(maxsize=None)
def _e_to_m_counts(mu: tuple[int, ...]) -> tuple:
    """[m_nu] e_mu, independent of the number of variables."""
    size = max(sum(mu), 1)
    return tuple((_strip(nu), c) for nu, c in elementary_in_monomials(Partition(mu), size).items())


def _closed_form_from_ehat(hat: SymPoly) -> dict:
    """Monomial coefficients of an ehat-expansion as polynomials in n."""
    out: dict[tuple[int, ...], object] = {}
    for lam, c in hat.coeffs.items():
        acc: dict[tuple[int, ...], object] = {(): sympy.Integer(1)}
        for s in _strip(lam):
            new: dict = {}
            for key, v in acc.items():
                for j, w in _ehat_symbolic(s):
                    nk = tuple(sorted(key + ((j,) if j else ()), reverse=True))
                    new[nk] = new.get(nk, 0) + v * w
            acc = new
        for mu, v in acc.items():
            for nu, cnt in _e_to_m_counts(mu):
                out[nu] = out.get(nu, 0) + sympy.Rational(c.numerator, c.denominator) * cnt * v
    clean = {}
    for nu, v in out.items():
        v = sympy.expand(v)
        if v != 0:
            clean[nu] = v
    return clean


def _to_fraction(x) -> Fraction:
    x = sympy.Rational(x)
    return Fraction(int(x.p), int(x.q))


# -------------------------------------------------------------- families


@dataclass
class SubleadingFamily:
    """Seeds P_{k,n} (by number of variables) plus, for r = 2, the all-n closed form.

    ``closed_form`` maps a stripped partition nu to the coefficient C_{k,n,nu}
    of m_nu as a sympy polynomial in ``N``.
    """

    model: WaveModel
    k: int
    seeds: dict[int, SymPoly]
    closed_form: dict[tuple[int, ...], object] | None = None
    sector: int | None = None

    def at(self, n: int) -> SymPoly:
        if n < 0:
            raise ValueError("n must be >= 0")
        if self.closed_form is None:
            if n not in self.seeds:
                raise PipelineError(f"no seed with {n} variables and no closed form")
            return self.seeds[n]
        coeffs = {}
        for nu, c in self.closed_form.items():
            if len(nu) > n:
                continue
            val = _to_fraction(c.subs(N, n)) if isinstance(c, sympy.Basic) else Fraction(c)
            if val:
                coeffs[Partition.of(nu, n)] = val
        return SymPoly(n, "m", coeffs)

    def coefficient(self, nu: Sequence[int], n=N):
        """C_{k,n,nu}; symbolic in n unless an integer is given."""
        if self.closed_form is None:
            raise PipelineError("this family has no closed form")
        c = self.closed_form.get(tuple(x for x in sorted(nu, reverse=True) if x), sympy.Integer(0))
        return c if n is N else _to_fraction(c.subs(N, n))

    def to_json(self) -> str:
        seeds = {
            str(m): {",".join(map(str, _strip(lam))): encode_scalar(c) for lam, c in p.coeffs.items()}
            for m, p in sorted(self.seeds.items())
        }
        obj = {
            "model": self.model.kind,
            "r": self.model.r,
            "k": self.k,
            "sector": self.sector,
            "seeds": seeds,
            "closed_form": None
            if self.closed_form is None
            else {",".join(map(str, nu)): str(c) for nu, c in sorted(self.closed_form.items())},
        }
        return json.dumps(obj, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "SubleadingFamily":
        obj = json.loads(text)
        model = WaveModel(obj["model"], obj["r"])

        def parts(key: str) -> tuple[int, ...]:
            return tuple(int(x) for x in key.split(",") if x)

        seeds = {
            int(m): SymPoly(int(m), "m", {Partition.of(parts(key), int(m)): decode_scalar(v) for key, v in body.items()})
            for m, body in obj["seeds"].items()
        }
        closed = obj["closed_form"]
        if closed is not None:
            closed = {parts(key): sympy.expand(sympy.sympify(v, locals={"n": N})) for key, v in closed.items()}
        return cls(model, obj["k"], seeds, closed, obj["sector"])


def _seed(model: WaveModel, k: int, nvars: int, sector, cfg: InterpolationConfig) -> SymPoly:
    return subleading_poly(model, k, nvars + 1, sector, cfg)


def extend_family(
    model: WaveModel,
    k: int,
    seeds: Mapping[int, SymPoly] | None = None,
    n_max: int | None = None,
    config: FamilyConfig = DEFAULT_FAMILY,
) -> SubleadingFamily:
    """Closed form of P_{k,n} (or Q_{k,n}) for all n from seeds with n <= n_max + 1.

    The seeds are rewritten in the shifted elementary basis ehat_s = e_s(u^2 - 1);
    specialisation at u = +-1 kills ehat_{n+1}, so consecutive members agree on
    the generators they share.  Past ``n_max`` no new generator may appear; the
    extra seed checks exactly that.
    """
    if not _r2(model):
        raise ValueError("closed-form families exist for the r = 2 models only")
    if k < 0:
        raise ValueError("k must be >= 0")
    n_max = family_bound(model, k) if n_max is None else n_max
    if seeds is None:
        seeds = {m: _seed(model, k, m, "+", config.interpolation) for m in range(0, n_max + 2)}
    seeds = dict(seeds)
    sizes = sorted(seeds)
    if sizes != list(range(sizes[0], sizes[-1] + 1)) or sizes[-1] < n_max + 1:
        raise ValueError(f"need consecutive seeds up to {n_max + 1} variables")
    for m in sizes[1:]:
        if m - 1 in seeds and not specialize(seeds[m], 1).equals(seeds[m - 1]):
            raise PipelineError(f"seeds with {m - 1} and {m} variables violate specialisation")
    hats = {m: basis_convert(seeds[m], "ehat") for m in sizes if m >= 1}
    for m in sizes:
        if m >= n_max + 1 and m - 1 in hats and not hats[m].coeffs == hats[m - 1].coeffs:
            raise PipelineError(f"shifted elementary expansion did not stabilise at {m} variables")
    top = hats[sizes[-1]] if sizes[-1] >= 1 else None
    if top is None:
        const = seeds[0].coeffs.get(Partition(()), Fraction(0))
        closed = {(): sympy.Rational(const.numerator, const.denominator)} if const else {}
    else:
        closed = _closed_form_from_ehat(top)
    fam = SubleadingFamily(model, k, seeds, closed)
    for m, p in seeds.items():
        if not fam.at(m).equals(p):
            raise PipelineError(f"closed form does not reproduce the seed with {m} variables")
    return fam


_FAMILIES: dict = {}


def family(model: WaveModel, k: int, config: FamilyConfig = DEFAULT_FAMILY) -> SubleadingFamily:
    """Cached closed-form family, limited by ``config.max_k``."""
    cap = config.cap(model.kind)
    if k > cap:
        raise PipelineError(f"closed-form family for k = {k} exceeds the configured range (max {cap})")
    key = (model, k, config)
    if key in _FAMILIES:
        return _FAMILIES[key]
    path = _family_path(model, k) if config == DEFAULT_FAMILY else None
    fam = None
    if path is not None and path.exists():
        try:
            fam = SubleadingFamily.from_json(path.read_text())
        except (OSError, ValueError, KeyError):
            fam = None
        # a stored family must still reproduce its own seeds
        if fam is not None and not all(fam.at(m).equals(p) for m, p in fam.seeds.items()):
            fam = None
    if fam is None:
        fam = extend_family(model, k, config=config)
        if path is not None:
            path.parent.mkdir(parents=True, exist_ok=True)
            tmp = path.with_suffix(".tmp")
            tmp.write_text(fam.to_json())
            tmp.replace(path)
    _FAMILIES[key] = fam
    return fam


def _family_path(model: WaveModel, k: int):
    import os
    from pathlib import Path

    root = os.environ.get("LARGEGENUS_CACHE")
    return Path(root) / f"family-{model.kind}-{k}.json" if root else None


def rspin_family_member(r: int, alpha: int, k: int, n: int, config: InterpolationConfig = DEFAULT) -> SymPoly:
    """R^(alpha)_{k,n} in n variables (not squared)."""
    return subleading_poly(rairy(r), k, n + 1, alpha, config)


# ----------------------------------------------------------- coefficients


@dataclass(frozen=True)
class AsymptoticCoefficient:
    """Evaluator (n, Multiplicities) -> exact value for one of alpha_k, beta_k, gamma_k."""

    model: WaveModel
    k: int
    sector: int | None = None

    def __call__(self, p: Multiplicities, **kw):
        if self.model.kind == "airy":
            return alpha_k(self.k, p, **kw)
        if self.model.kind == "bessel":
            return beta_k(self.k, p, **kw)
        raise TypeError("r-spin coefficients need d and a; use gamma_k")


def _contract(poly: SymPoly, n: int, pmap: Mapping[int, int]) -> Fraction:
    total = Fraction(0)
    for lam, c in poly.coeffs.items():
        total += c * m_times_h_coeff(n, pmap, _strip(lam))
    return total


def _coefficient_value(model: WaveModel, k: int, p: Multiplicities, config: FamilyConfig) -> Fraction:
    n = p.n
    pmap = dict(p.p)
    if k <= config.cap(model.kind):
        poly = family(model, k, config).at(n)
    else:
        poly = _seed(model, k, n, "+", config.interpolation)
    return _contract(poly, n, pmap)


def alpha_k(k: int, p: Multiplicities, config: FamilyConfig = DEFAULT_FAMILY) -> Fraction:
    """Coefficient of the k-th correction for psi-class numbers with multiplicities p."""
    return _coefficient_value(AIRY, k, p, config)


def beta_k(k: int, p: Multiplicities, config: FamilyConfig = DEFAULT_FAMILY) -> Fraction:
    """Theta-class analogue of :func:`alpha_k`."""
    return _coefficient_value(BESSEL, k, p, config)


def _symbolic(model: WaveModel, k: int, config: FamilyConfig):
    fam = family(model, k, config)
    top = max((max(nu) for nu in fam.closed_form if nu), default=0)
    ps = sympy.symbols(f"p0:{max(top, 1)}")
    pmap = {i: ps[i] for i in range(top)}
    total = sympy.Integer(0)
    for nu, c in fam.closed_form.items():
        total += c * m_times_h_coeff(N, pmap, nu)
    return sympy.expand(total), ps


def alpha_symbolic(k: int, config: FamilyConfig = DEFAULT_FAMILY):
    """alpha_k as a polynomial in n and p_0, p_1, ... (sympy), with the symbols used."""
    return _symbolic(AIRY, k, config)


def beta_symbolic(k: int, config: FamilyConfig = DEFAULT_FAMILY):
    return _symbolic(BESSEL, k, config)


# ---------------------------------------------------------------- r-spin


def _sector_pair(r: int, alpha: int) -> list[int]:
    return [alpha, r - alpha]


def _unit_phase(r: int, beta: int) -> Cyclotomic:
    """A_{r,beta} / |A_{r,beta}| = -i zeta_{2r}^beta."""
    Nf = field_order(r)
    return Cyclotomic.root(Nf, (3 * Nf // 4 + beta * Nf // (2 * r)) % Nf)


def _check_rspin(r: int, alpha: int, d, a):
    if r < 3:
        raise ValueError("r-spin coefficients need r >= 3")
    if not 1 <= alpha <= r // 2:
        raise ValueError(f"sector must lie in 1..{r // 2} (conjugate sectors are combined)")
    g = rspin_genus(r, d, a)
    return g, len(d), 2 * g - 2 + len(d)


def gamma_k_direct(r: int, alpha: int, k: int, d: Sequence[int], a: Sequence[int]) -> Cyclotomic:
    """n = 1 gamma_k straight from the one-point minors of the sectors alpha, r - alpha."""
    g, n, M = _check_rspin(r, alpha, d, a)
    if n != 1:
        raise ValueError("the direct route is for n = 1")
    model = rairy(r)
    total = Cyclotomic.zero(field_order(r))
    for beta in _sector_pair(r, alpha):
        w = one_point_minor_series(model, beta, k + 1)[k][2]
        total = total + model.stokes(beta) * _unit_phase(r, beta) ** (k - M) * w
    sign = -1 if (g - 1 - d[0]) % 2 else 1
    return total * (r * sign)


def gamma_k(
    r: int, alpha: int, k: int, d: Sequence[int], a: Sequence[int], config: InterpolationConfig = DEFAULT
) -> Cyclotomic:
    """gamma^(r,alpha)_k for the insertion (d, a) as an exact element of Q(zeta_N).

    Assembled from R^(alpha)_{k,n} and the weighted coefficient extraction
    [u^m] m_nu h^(r,alpha); the (alpha, r - alpha) pair is combined.
    """
    g, n, M = _check_rspin(r, alpha, d, a)
    Nf = field_order(r)
    R = rspin_family_member(r, alpha, k, n, config)
    ms = tuple(sorted((r * di + ai for di, ai in zip(d, a)), reverse=True))
    i_inv_k = Cyclotomic.root(Nf, (-(Nf // 4) * k) % Nf)
    total = Cyclotomic.zero(Nf)
    for lam, c in R.coeffs.items():
        deg = lam.weight
        bar = c * i_inv_k * Cyclotomic.root(Nf, (-(Nf // (2 * r)) * alpha * (deg - k)) % Nf)
        total = total + bar * weighted_m_times_h_total(n, ms, _strip(lam), r, alpha)
    sign = -1 if (sum(d) + (alpha + 1) * n) % 2 else 1
    from .symfun import sine_weight

    return total * sine_weight(1, r, alpha).inverse() * sign


def gamma_zero_closed_form(r: int, alpha: int, d: Sequence[int], a: Sequence[int]) -> Cyclotomic:
    """(-1)^((alpha-1)(|d|+n)) prod sin(alpha a_i pi/r) / sin(alpha pi/r)."""
    from .symfun import sine_weight

    n = len(d)
    out = sine_weight(1, r, alpha).inverse()
    for ai in a:
        out = out * sine_weight(ai, r, alpha)
    return out if ((alpha - 1) * (sum(d) + n)) % 2 == 0 else -out


# -------------------------------------------------------------- estimates


@dataclass
class Estimate:
    """Truncated asymptotic value of the normalised intersection number.

    ``sectors`` holds the contribution of each action modulus (r-spin only; the
    r = 2 models have a single entry).
    """

    value: mpmath.mpf
    sectors: dict
    log_prefactor: mpmath.mpf

    def __float__(self):
        return float(self.value)


def _ff(x, k: int):
    out = mpmath.mpf(1)
    for i in range(k):
        out *= x - i
    return out


def _series(coeffs, scale, M: int):
    total = mpmath.mpf(0)
    for k, c in enumerate(coeffs):
        if k > M - 2 and k:
            break
        total += mpmath.mpf(scale) ** k * c / _ff(M - 1, k)
    return total


def _as_mpf(c):
    if isinstance(c, Cyclotomic):
        z = cyclo_embed(c, precision=max(mpmath.mp.dps, 16))
        z = mpmath.mpc(z)
        if abs(z.imag) > mpmath.mpf(10) ** (-mpmath.mp.dps // 2) * max(1, abs(z.real)):
            raise PipelineError("combined sector coefficient is not real")
        return z.real
    q = Fraction(c)
    return mpmath.mpf(q.numerator) / q.denominator


def asymptotic_estimate(
    model: WaveModel,
    g: int,
    d: Sequence[int],
    a: Sequence[int] | None = None,
    K: int = 0,
    config: FamilyConfig = DEFAULT_FAMILY,
) -> Estimate:
    """Truncated large-genus value of <tau_d> prod (2d+1)!! (psi, Theta) or
    <tau_{d,a}> prod (r d + a)!_(r) (r-spin), keeping K corrections."""
    d = tuple(d)
    n = len(d)
    M = 2 * g - 2 + n
    if M < 1:
        raise ValueError("need 2g - 2 + n >= 1")
    if K < 0:
        raise ValueError("K must be >= 0")
    if model.kind in ("airy", "bessel"):
        want = 3 * g - 3 + n if model.kind == "airy" else g - 1
        if sum(d) != want:
            raise ValueError(f"degree constraint |d| = {want} fails")
        p = Multiplicities.from_tuple(d)
        fn = alpha_k if model.kind == "airy" else beta_k
        try:
            coeffs = [fn(k, p, config) for k in range(K + 1)]
        except PipelineError as exc:
            raise PipelineError(f"K = {K} is beyond the available coefficients: {exc}") from exc
        A = mpmath.mpf(2) / 3 if model.kind == "airy" else mpmath.mpf(2)
        den = 4 if model.kind == "airy" else 2
        logp = n * mpmath.log(2) - mpmath.log(den * mpmath.pi) + mpmath.loggamma(M) - M * mpmath.log(A)
        body = _series([_as_mpf(c) for c in coeffs], A, M)
        val = mpmath.exp(logp) * body
        return Estimate(val, {"+": val}, logp)
    r = model.r
    if a is None or len(a) != n:
        raise ValueError("r-spin estimates need primary labels a")
    if rspin_genus(r, d, a) != g:
        raise ValueError("degree constraint fails for this genus")
    logp = n * mpmath.log(2) - mpmath.log(2 * mpmath.pi) + mpmath.loggamma(M) - (g - 1 - sum(d)) * mpmath.log(r)
    sectors = {}
    total = mpmath.mpf(0)
    for alpha in range(1, r // 2 + 1):
        c = 2 * mpmath.mpf(r) / (r + 1) * mpmath.sin(mpmath.pi * alpha / r)
        coeffs = [
            _as_mpf(gamma_k_direct(r, alpha, k, d, a) if n == 1 else gamma_k(r, alpha, k, d, a)) for k in range(K + 1)
        ]
        part = _series(coeffs, c, M) * mpmath.exp(logp - M * mpmath.log(c))
        if 2 * alpha == r:
            part /= 2
        sectors[alpha] = part
        total += part
    return Estimate(total, sectors, logp)


def u_polynomial(k: int, g: int, n: int, point: Sequence[Fraction], config: FamilyConfig = DEFAULT_FAMILY):
    """U_{k,g,n} at u = point, two ways: from the family and from the minors.

    Returns (family value, direct value); the direct side is
    (-1)^n 2^(k+2) prod z_j^2 sum_i z_i^(-3(2g-2+n-k)) W^(+,i)_{k,n}(z) with
    z = 1/u, which must be a polynomial in u identical to
    sum_d P^(d)_{k,n}(u) h_{3g-3+n-d}(u^2).
    """
    us = [Fraction(x) for x in point]
    if len(us) != n:
        raise ValueError("point must have n entries")
    zs = [1 / u for u in us]
    M = 2 * g - 2 + n
    direct = Fraction(0)
    for i in range(n):
        direct += zs[i] ** (-3 * (M - k)) * minor_value(AIRY, "+", i, zs, k)
    prod = Fraction(1)
    for z in zs:
        prod *= z * z
    direct *= (-1) ** n * 2 ** (k + 2) * prod
    P = family(AIRY, k, config).at(n) if k <= config.cap("airy") else _seed(AIRY, k, n, "+", config.interpolation)
    sq = [u * u for u in us]
    D = 3 * g - 3 + n
    h = _complete_values(sq, D)
    from .symfun import monomial_value

    fam = Fraction(0)
    for lam, c in P.coeffs.items():
        w = lam.weight
        if w <= D:
            fam += c * monomial_value(lam, sq) * h[D - w]
    return fam, direct


def _complete_values(xs: Sequence[Fraction], top: int) -> list[Fraction]:
    """[h_0(xs), ..., h_top(xs)] via h_D(x, y..) = sum_j x^j h_{D-j}(y..)."""
    h = [Fraction(1)] + [Fraction(0)] * top
    for x in xs:
        for D in range(1, top + 1):
            h[D] += x * h[D - 1]
    return h
