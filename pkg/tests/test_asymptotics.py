import math
import random
from fractions import Fraction

import mpmath
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from largegenus.asymptotics import (
    N,
    FamilyConfig,
    SubleadingFamily,
    alpha_k,
    alpha_symbolic,
    asymptotic_estimate,
    beta_k,
    beta_symbolic,
    family,
    gamma_k,
    gamma_k_direct,
    gamma_zero_closed_form,
    specialize,
    u_polynomial,
)
from largegenus.correlators import PipelineError, intersection_number
from largegenus.exact import Multiplicities, r_factorial
from largegenus.interp import subleading_poly
from largegenus.symfun import Partition
from largegenus.wave import AIRY, BESSEL, rairy

from oracles import ALPHA_TABLE, BETA_TABLE, TWO_POINT_ALPHA, P_TABLE, Q_TABLE, n, p0, p1, p2


def _closed_form_matches(fam, table):
    keys = set(table) | {nu for nu, c in fam.closed_form.items() if sympy.expand(c) != 0}
    return all(sympy.expand(fam.coefficient(nu) - table.get(nu, 0)) == 0 for nu in keys)


@pytest.mark.parametrize("k", [0, 1, 2])
def test_psi_family_matches_table(k):
    assert _closed_form_matches(family(AIRY, k), P_TABLE[k])


@pytest.mark.parametrize("k", [0, 1, 3])
def test_theta_family_matches_table(k):
    assert _closed_form_matches(family(BESSEL, k), Q_TABLE[k])


def test_theta_second_family():
    # the reference m_empty coefficient is 4x this value
    fam = family(BESSEL, 2)
    assert sympy.expand(fam.coefficient(()) - (9 - 4 * N) / 32) == 0
    assert fam.coefficient((1,)) == sympy.Rational(1, 8)
    assert set(nu for nu, c in fam.closed_form.items() if c != 0) == {(), (1,)}


@pytest.mark.parametrize("k", [0, 1])
def test_alpha_symbolic_matches_table(k):
    expr, _ = alpha_symbolic(k)
    assert sympy.expand(expr - ALPHA_TABLE[k]) == 0


def _ff(x, m):
    out = sympy.Integer(1)
    for i in range(m):
        out *= x - i
    return out


def test_alpha_two_from_monomial_table():
    # evaluate the monomial-basis table directly: m_nu at the point counts
    # index choices with d_i >= nu_i, so m_(2,1,1) -> (n-p0-p1) C(n-p0-1, 2)
    expr, _ = alpha_symbolic(2)
    q0, q1, q2 = n - p0, n - p0 - p1, n - p0 - p1 - p2
    counts = {
        (): 1,
        (1,): q0,
        (2,): q1,
        (1, 1): _ff(q0, 2) / 2,
        (3,): q2,
        (2, 1): q1 * (q0 - 1),
        (1, 1, 1): _ff(q0, 3) / 6,
        (2, 1, 1): q1 * _ff(q0 - 1, 2) / 2,
        (1, 1, 1, 1): _ff(q0, 4) / 24,
    }
    from_m = sum(P_TABLE[2].get(nu, 0) * c for nu, c in counts.items())
    assert sympy.expand(expr - from_m) == 0


def test_alpha_two_reference_gap():
    # only the ff(n-p0-1, 2)(n-p0-p1) term differs from the reference
    # evaluation, 3/8 against 3/48
    expr, _ = alpha_symbolic(2)
    gap = sympy.Rational(3, 8) - sympy.Rational(3, 48)
    assert sympy.expand(expr - ALPHA_TABLE[2] - gap * _ff(n - p0 - 1, 2) * (n - p0 - p1)) == 0


@pytest.mark.parametrize("k", [0, 1, 3])
def test_beta_symbolic_matches_table(k):
    expr, _ = beta_symbolic(k)
    assert sympy.expand(expr - BETA_TABLE[k]) == 0


@pytest.mark.parametrize("key", sorted(TWO_POINT_ALPHA))
def test_two_point_alpha_values(key):
    k, d1 = key
    assert alpha_k(k, Multiplicities.from_tuple((d1, 40))) == TWO_POINT_ALPHA[key]


def test_beta_one():
    for d in [(4,), (0, 3), (1, 1, 5)]:
        assert beta_k(1, Multiplicities.from_tuple(d)) == Fraction(-1, 4)


@given(st.integers(1, 6), st.data())
def test_alpha_values_agree_with_symbolic(npts, data):
    d = tuple(data.draw(st.integers(0, 4)) for _ in range(npts))
    p = Multiplicities.from_tuple(d)
    for k in (1, 2):
        expr, ps = alpha_symbolic(k)
        subs = {sym: p[i] for i, sym in enumerate(ps)}
        subs[N] = npts
        assert alpha_k(k, p) == Fraction(str(expr.subs(subs)))


# ------------------------------------------------------ family invariants


@pytest.mark.parametrize("model,kmax", [(AIRY, 2), (BESSEL, 3)], ids=["airy", "bessel"])
def test_family_specialisation_and_degree(model, kmax):
    for k in range(kmax + 1):
        fam = family(model, k)
        step = 3 if model.kind == "airy" else 1
        for m in range(1, 8):
            P = fam.at(m)
            assert specialize(P, Fraction(1)).equals(fam.at(m - 1))
            if P.coeffs:
                assert P.degree() <= max(step * k - 1, 0)
                assert max(lam.largest for lam in P.coeffs) <= step * k // 2


def test_family_seeds_equal_fresh_fits():
    fam = family(AIRY, 1)
    for m, seed in fam.seeds.items():
        assert subleading_poly(AIRY, 1, m + 1).equals(seed)
        assert fam.at(m).equals(seed)


def test_family_json_round_trip():
    fam = family(AIRY, 2)
    back = SubleadingFamily.from_json(fam.to_json())
    assert back.closed_form == fam.closed_form
    assert all(back.seeds[m].equals(s) for m, s in fam.seeds.items())


def test_family_cap():
    with pytest.raises(PipelineError):
        family(AIRY, 3)
    with pytest.raises(PipelineError):
        family(BESSEL, 2, FamilyConfig(max_k=(("bessel", 1),)))


def test_beyond_cap_uses_fixed_n_seed():
    cfg = FamilyConfig(max_k=(("airy", 0),))
    p = Multiplicities.from_tuple((0, 30))
    assert alpha_k(1, p, cfg) == alpha_k(1, p)


# ----------------------------------------------------------- r-spin family


def _scaled(poly, factor, power_of):
    from largegenus.symfun import SymPoly

    return SymPoly(poly.n, "m", {lam: c * factor * power_of**lam.weight for lam, c in poly.coeffs.items()})


@pytest.mark.parametrize("k", [0, 1, 2])
def test_rspin_family_invariants(k):
    from largegenus.asymptotics import rspin_family_member
    from largegenus.exact import Cyclotomic, field_order

    r = 3
    Nf = field_order(r)
    one = Cyclotomic.one(Nf)
    for m in range(1, 4 if k < 2 else 3):
        for alpha in (1, 2):
            R = rspin_family_member(r, alpha, k, m)
            below = rspin_family_member(r, alpha, k, m - 1)
            zm = Cyclotomic.root(Nf, (-(Nf // r) * alpha) % Nf)
            assert specialize(R, one).equals(below)
            assert specialize(R, zm).equals(below)
            sign = (-Cyclotomic.root(Nf, (Nf // r) * alpha)) ** k
            assert _scaled(R, sign, zm).equals(rspin_family_member(r, r - alpha, k, m))
            if R.coeffs:
                assert R.degree() <= min((r + 1) * k + m - 1, 2 * ((r + 1) * k - 1) if k else 0)
                assert max(lam.largest for lam in R.coeffs) <= (r + 1) * k


# ----------------------------------------------------------- U cross-check


@pytest.mark.parametrize("k", [0, 1, 2])
@pytest.mark.parametrize("n_pts", [1, 2, 3])
def test_u_polynomial_cross_check(k, n_pts):
    rng = random.Random(10 * k + n_pts)
    for g in range(max(1, k), 6):
        if 2 * g - 2 + n_pts - k < 1:
            continue
        pt = [Fraction(rng.randint(2, 30), rng.randint(31, 60)) * (1 + j) for j in range(n_pts)]
        fam, direct = u_polynomial(k, g, n_pts, pt)
        assert fam == direct


# ------------------------------------------------------------------ gamma


@pytest.mark.parametrize("r", [3, 4, 5])
def test_gamma_routes_agree_one_point(r):
    for g in (2, 3):
        for a in range(1, r):
            rest = (r + 1) * (2 * g - 1) - a
            if rest % r:
                continue
            d = (rest // r,)
            for alpha in range(1, r // 2 + 1):
                for k in range(3):
                    assert gamma_k(r, alpha, k, d, (a,)) == gamma_k_direct(r, alpha, k, d, (a,))


@pytest.mark.parametrize(
    "r,d,a",
    [(3, (1, 3), (2, 2)), (3, (2, 5), (1, 2)), (4, (1, 3), (1, 3)), (4, (0, 4), (2, 2)), (3, (0, 1, 4), (1, 2, 2))],
)
def test_gamma_zero_closed_form(r, d, a):
    for alpha in range(1, r // 2 + 1):
        assert gamma_k(r, alpha, 0, d, a) == gamma_zero_closed_form(r, alpha, d, a)


def test_gamma_rejects_bad_sector():
    with pytest.raises(ValueError):
        gamma_k_direct(3, 2, 0, (6,), (2,))


# --------------------------------------------------------------- estimates


def test_psi_estimate_one_point():
    g = 30
    d = (3 * g - 2,)
    exact = intersection_number(AIRY, d) * r_factorial(2 * d[0] + 1, 2)
    est = asymptotic_estimate(AIRY, g, d, K=0)
    assert abs(est.value / (mpmath.mpf(exact.numerator) / exact.denominator) - 1) <= mpmath.mpf(1) / g


@pytest.mark.parametrize("n_pts", [1, 2, 3])
def test_theta_estimate_gamma_ratio(n_pts):
    for g in (10, 25):
        d0 = (0,) * (n_pts - 1)
        with mpmath.workdps(40):
            e1 = asymptotic_estimate(BESSEL, g, d0 + (g - 1,), K=0)
            e2 = asymptotic_estimate(BESSEL, g + 1, d0 + (g,), K=0)
            want = mpmath.mpf((2 * g - 1 + n_pts) * (2 * g - 2 + n_pts)) / 4
            assert abs(e2.value / e1.value - want) < mpmath.mpf(10) ** -20 * want


def test_rspin_sector_suppression():
    from largegenus.harness import _abs_action

    r = 4
    ratios = []
    for g in (6, 10, 14):
        for a in (1, 2, 3):
            rest = (r + 1) * (2 * g - 1) - a
            if rest % r == 0:
                d = (rest // r,)
                break
        est = asymptotic_estimate(rairy(r), g, d, (a,), K=0)
        M = 2 * g - 1
        scale = (_abs_action(r, 1) / _abs_action(r, 2)) ** M
        ratios.append(abs(est.sectors[2] / est.sectors[1]) / scale)
    # after removing the exponential factor the sector ratio is O(1)
    assert all(mpmath.mpf(1) / 10 < q < 10 for q in ratios)


def test_estimate_input_errors():
    with pytest.raises(ValueError):
        asymptotic_estimate(AIRY, 5, (1, 1), K=0)
    with pytest.raises(ValueError):
        asymptotic_estimate(rairy(3), 3, (6,), None)
    with pytest.raises(ValueError):
        asymptotic_estimate(AIRY, 5, (13,), K=-1)
