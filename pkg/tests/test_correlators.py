import itertools
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from largegenus.correlators import (
    PipelineError,
    correlator,
    extract_intersection,
    intersection_number,
    kernel,
    sine_weighted_sides,
    minor,
    minor_numerator,
    ode_check_w1,
    cyclic_sum_sides,
    transseries_sector,
)
from largegenus.exact import r_factorial
from largegenus.series import invert_difference
from largegenus.wave import AIRY, BESSEL, rairy

MODELS = [AIRY, BESSEL, rairy(3), rairy(4)]
IDS = ["airy", "bessel", "r3", "r4"]


def psi(*d):
    return intersection_number(AIRY, d)


# ---------------------------------------------------------- golden values


def test_one_point_goldens():
    assert psi(1) == Fraction(1, 24)
    assert psi(4) == Fraction(1, 1152)
    assert psi(7) == Fraction(1, 82944)
    for g, want in [(1, Fraction(-1, 32)), (2, Fraction(-105, 2048)), (3, Fraction(-25025, 65536))]:
        poly = correlator(AIRY, g, 1)
        assert poly.coeffs == {((3 * g - 2,), (1,)): want}


@pytest.mark.parametrize("g", range(1, 9))
def test_one_point_closed_form(g):
    assert psi(3 * g - 2) == Fraction(1, 24**g * math.factorial(g))


def test_genus_zero_three_point():
    assert psi(0, 0, 0) == 1
    assert intersection_number(rairy(3), (0, 0, 0), (1, 1, 2)) == 1


def test_known_two_point_values():
    assert psi(1, 1) == Fraction(1, 24)
    assert psi(2, 3) == Fraction(29, 5760)


@pytest.mark.parametrize("g", range(1, 8))
def test_theta_one_point_closed_form(g):
    want = Fraction(r_factorial(2 * g - 1, 2) * (r_factorial(2 * g - 3, 2) if g > 1 else 1), 8**g * math.factorial(g))
    assert intersection_number(BESSEL, (g - 1,)) == want


def test_theta_genus_one():
    assert intersection_number(BESSEL, (0,)) == Fraction(1, 8)


def test_degree_mismatch_is_an_error():
    poly = correlator(AIRY, 1, 2)
    with pytest.raises(ValueError):
        extract_intersection(poly, (0, 0))


# ------------------------------------------------- string and dilaton


def _tuples(total, length):
    return [d for d in itertools.combinations_with_replacement(range(total + 1), length) if sum(d) == total]


@pytest.mark.parametrize("g", range(0, 5))
@pytest.mark.parametrize("n", [2, 3])
def test_string_equation(g, n):
    # n-point numbers with a tau_0 reduce to (n-1)-point numbers
    if 2 * g - 3 + n <= 0:
        pytest.skip("unstable after forgetting a point")
    for d in _tuples(3 * g - 3 + n, n - 1):
        rhs = sum(psi(*(d[:i] + (d[i] - 1,) + d[i + 1 :])) for i in range(n - 1) if d[i] > 0)
        assert psi(0, *d) == rhs, d


@pytest.mark.parametrize("g", range(1, 5))
@pytest.mark.parametrize("n", [2, 3])
def test_dilaton_equation(g, n):
    for d in _tuples(3 * g - 3 + n - 1, n - 1):
        assert psi(1, *d) == (2 * g - 3 + n) * psi(*d), d


# -------------------------------------------- symmetry and ordering


@pytest.mark.parametrize("model", MODELS, ids=IDS)
@pytest.mark.parametrize("g,n", [(0, 3), (1, 2), (1, 3), (2, 2), (2, 3), (3, 2)])
def test_symmetric_and_ordering_independent(model, g, n):
    if model.kind == "rairy" and model.r >= 4 and g + n > 4:
        pytest.skip("r = 4 series beyond desk budget")
    base = correlator(model, g, n, method="series")
    assert base.is_symmetric()
    for perm in itertools.permutations(range(1, n + 1)):
        other = correlator(model, g, n, ranks=perm, method="series")
        assert other.coeffs == base.coeffs


def test_interpolation_engine_agrees_with_series():
    from largegenus.interp import correlator_by_interpolation

    for g, n in [(1, 3), (2, 2)]:
        assert correlator_by_interpolation(AIRY, g, n).coeffs == correlator(AIRY, g, n, method="series").coeffs


# ------------------------------------------------------------ kernels


def test_airy_kernel_leading_term():
    ks = kernel(AIRY, ("+", "-"), 0, 1, 0, z_depth=6)
    want = invert_difference(0, 1, 60)
    blk = ks.data[0]
    # the weight cap may keep more than z_depth geometric terms
    assert set(blk.terms) <= set(want.terms)
    assert all(blk.terms[e] == Fraction(1, 2) * want.terms[e] for e in blk.terms)
    assert set(invert_difference(0, 1, 6).terms) <= set(blk.terms)


def test_rairy_kernel_leading_term():
    ks = kernel(rairy(3), ("+", "-"), 0, 1, 0, z_depth=5)
    want = invert_difference(0, 1, 60)
    blk = ks.data[0]
    assert set(blk.terms) <= set(want.terms)
    assert all(blk.terms[e] == Fraction(1, 3) * want.terms[e] for e in blk.terms)
    assert set(invert_difference(0, 1, 5).terms) <= set(blk.terms)


def test_kernel_parity():
    kp = kernel(AIRY, ("+", "-"), 0, 1, 5)
    km = kernel(AIRY, ("-", "+"), 0, 1, 5)
    for k in range(6):
        assert km.data[k].equals(kp.data[k].scale(-((-1) ** k)))


def test_kernel_rejects_diagonal():
    with pytest.raises(ValueError):
        kernel(AIRY, ("+", "-"), 1, 1, 2)


# -------------------------------------------------------------- minors


@pytest.mark.parametrize("n", [1, 2, 3])
def test_minor_parity(n):
    order = 6 if n < 3 else 4
    plus = minor(AIRY, "+", 0, n, order)
    minus = minor(AIRY, "-", 0, n, order)
    for k in range(order + 1):
        assert minus.blocks[k].equals(plus.blocks[k].scale((-1) ** (n + k)))


def test_leading_minor_closed_form():
    # k = 0: -(1/4) (x1...xn)^(-1/2) x_i^(n/2 - 1) / prod_{j != i} (x_i - x_j)
    zs = [Fraction(3, 2), Fraction(-5, 7), Fraction(4, 9)]
    for n in (2, 3):
        pt = zs[:n]
        got = _full_minor(n, 0, 0, pt)
        want = Fraction(-1, 4)
        for z in pt:
            want /= z
        want *= pt[0] ** (n - 2)
        for j in range(1, n):
            want /= pt[0] ** 2 - pt[j] ** 2
        assert got == want


def _full_minor(n, i, k, zs):
    if n == 1:
        return minor(AIRY, "+", 0, 1, k).blocks[k].evaluate(zs) / zs[0]
    num = minor_numerator(AIRY, "+", i, n, k).evaluate(zs)
    den = 1
    for j in range(n):
        if j != i:
            den *= (zs[i] - zs[j]) * (-zs[i] - zs[j])
    prod = 1
    for z in zs:
        prod *= z
    return num / den / prod


def _residue(n, i, j, k, zs, sign):
    """Res_{z_j = sign z_i} of the full minor, read off the exact numerator."""
    pt = list(zs)
    pt[j] = sign * zs[i]
    num = minor_numerator(AIRY, "+", i, n, k).evaluate(pt)
    den = 1
    for l in range(n):
        if l == i:
            continue
        if l == j:
            # drop the vanishing factor; its z_j-derivative is -1
            den *= -((-zs[i] - pt[j]) if sign == 1 else (zs[i] - pt[j]))
        else:
            den *= (zs[i] - pt[l]) * (-zs[i] - pt[l])
    prod = 1
    for z in pt:
        prod *= z
    return num / den / prod


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("k", [0, 1, 2, 3])
def test_minor_residues(n, k):
    zs = [Fraction(3, 2), Fraction(5, 7), Fraction(-4, 3)][:n]
    for i in range(n):
        for j in range(n):
            if j == i:
                continue
            rest = [z for l, z in enumerate(zs) if l != j]
            want = -Fraction(1, 2) / zs[i] * _full_minor(n - 1, i if i < j else i - 1, k, rest)
            for sign in (1, -1):
                assert _residue(n, i, j, k, zs, sign) == want


def test_minor_numerator_is_certified_polynomial():
    # regular along z_k = z_l (k, l != i): the numerator over the i-poles alone is a polynomial
    blk = minor_numerator(AIRY, "+", 0, 3, 2)
    assert blk.cap is None and blk.terms


# ------------------------------------------------------ trans-series


def test_transseries_sectors():
    pert = transseries_sector(AIRY, (), (), 2, 4)
    corr = correlator(AIRY, 1, 2)
    blk = pert.blocks[2]  # hbar^(2g - 2 + n) with g = 1
    for (d, a), c in corr.coeffs.items():
        e = tuple(-(2 * di + 3) + 1 for di in d)
        assert blk.terms.get(e) == c
    assert transseries_sector(AIRY, (1,), (), 2, 3).blocks[3].equals(minor(AIRY, "+", 1, 2, 3).blocks[3])
    assert transseries_sector(AIRY, (), (0,), 2, 3).blocks[2].equals(minor(AIRY, "-", 0, 2, 3).blocks[2])
    with pytest.raises(NotImplementedError):
        transseries_sector(AIRY, (0,), (1,), 2, 2)


# ------------------------------------------------------------------ ODE


def test_one_point_ode():
    assert ode_check_w1(AIRY, 10)
    assert ode_check_w1(AIRY, 2)


def test_one_point_ode_negative_control():
    assert not ode_check_w1(AIRY, 10, perturb=3)


# ------------------------------------------ partial-fraction identities


def _distinct_points(rng, n):
    while True:
        pts = [Fraction(rng.randint(-60, 60), rng.randint(1, 13)) for _ in range(n)]
        if len(set(pts)) == n and all(p for p in pts):
            return pts


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_cyclic_sum_identity(n):
    rng = random.Random(n)
    for _ in range(100):
        zs = _distinct_points(rng, n + 1)
        tau = zs.pop()
        lhs, rhs = cyclic_sum_sides(zs, tau)
        assert lhs == rhs


@pytest.mark.parametrize("r", [2, 3, 4, 5, 6])
@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_sine_weighted_identity(r, n):
    rng = random.Random(100 * r + n)
    for alpha in range(1, r):
        for _ in range(100 // (r - 1) + 1):
            zs = [Fraction(rng.randint(20, 90), rng.randint(7, 13)) for _ in range(n)]
            if len(set(zs)) < n:
                continue
            g = rng.randint(1, 2)
            lhs, rhs = sine_weighted_sides(zs, r, alpha, g)
            assert abs(lhs - rhs) <= 1e-10 * max(1, abs(rhs))
