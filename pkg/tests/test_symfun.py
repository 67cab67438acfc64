import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from largegenus.exact import Cyclotomic, field_order
from largegenus.symfun import (
    Partition,
    SymPoly,
    basis_convert,
    brute_m_times_h,
    brute_weighted_m_times_h,
    dual_m_times_h_coeff,
    h_r_alpha,
    m_times_h_coeff,
    partitions,
    weighted_m_times_h_coeff,
    weighted_m_times_h_total,
)


def _padded_partitions(top, n):
    for w in range(top + 1):
        for lam in partitions(w, n):
            yield lam.padded(n)


def test_elementary_one_is_monomial_one():
    p = basis_convert(SymPoly(3, "e", {(1,): 1}), "m")
    assert p.coeffs == {Partition((1, 0, 0)): 1}


def test_complete_two_in_two_variables():
    p = basis_convert(SymPoly(2, "h", {(2,): 1}), "m")
    assert p.coeffs == {Partition((2, 0)): 1, Partition((1, 1)): 1}


def test_shifted_elementary_back_to_plain():
    p = basis_convert(SymPoly(3, "ehat", {(1,): 1}), "e")
    assert p.coeffs == {Partition(()): -3, Partition((1,)): 1}


@given(st.integers(1, 3), st.data())
def test_basis_round_trips_preserve_values(n, data):
    lams = list(_padded_partitions(4, n))
    coeffs = {lam: Fraction(data.draw(st.integers(-5, 5))) for lam in data.draw(st.lists(st.sampled_from(lams), max_size=4))}
    p = SymPoly(n, "m", coeffs)
    pt = [Fraction(data.draw(st.integers(-4, 4)), data.draw(st.integers(1, 3))) for _ in range(n)]
    for target in ("e", "h", "ehat", "echeck"):
        q = basis_convert(p, target)
        assert basis_convert(q, "m").equals(p)
        assert basis_convert(q, "m").evaluate(pt) == p.evaluate(pt)


def test_m_times_h_worked_example():
    assert m_times_h_coeff(4, (4, 3, 2, 1), (3, 2, 1, 1)) == 4


def test_m_times_h_empty_nu_is_one():
    assert m_times_h_coeff(3, (5, 2, 0), ()) == 1


@pytest.mark.parametrize("m", [1, 2, 3])
def test_m_times_h_ones(m):
    n = 4
    mu = (3, 1, 0, 0)
    p0 = 2
    want = Fraction(math.perm(n - p0, m), math.factorial(m)) if n - p0 >= m else 0
    assert m_times_h_coeff(n, mu, (1,) * m) == want


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_m_times_h_against_brute_force(n):
    lams = list(_padded_partitions(8, n))
    for mu in lams:
        for nu in lams:
            if nu.weight > mu.weight:
                continue
            want = brute_m_times_h(n, mu.parts, nu.parts)
            assert m_times_h_coeff(n, mu.parts, nu.parts) == want, (mu, nu)
            assert dual_m_times_h_coeff(n, mu.parts, nu.parts) == want, (mu, nu)


def test_sine_weight_vanishes_on_multiples_of_r():
    assert h_r_alpha(6, 3, 1, 2, (3, 3)).is_zero()
    one = Cyclotomic.one(field_order(2))
    assert h_r_alpha(6, 2, 1, 2, (1, 5)) == one
    # sin(3 pi / 2): odd exponents carry a sign, not always 1
    assert h_r_alpha(4, 2, 1, 2, (1, 3)) == -one


def test_sine_weight_r4():
    v = complex(h_r_alpha(5, 4, 1, 1, (5,)))
    assert abs(v - (-math.sqrt(2) / 2)) < 1e-12


def test_h_r_alpha_rejects_wrong_degree():
    with pytest.raises(ValueError):
        h_r_alpha(3, 3, 1, 2, (1, 1))


@pytest.mark.parametrize("r,alpha", [(3, 1), (3, 2), (4, 1), (4, 2), (5, 2)])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_weighted_m_times_h_against_brute_force(r, alpha, n):
    lams = list(_padded_partitions(8, n))
    for mu in lams:
        for nu in lams:
            if nu.weight > mu.weight:
                continue
            want = brute_weighted_m_times_h(n, mu.parts, nu.parts, r, alpha)
            got = weighted_m_times_h_total(n, mu.parts, nu.parts, r, alpha)
            assert got == want, (mu, nu)


def test_weighted_reduces_to_signed_odd_count_for_r2():
    n = 3
    for mu in _padded_partitions(6, n):
        for nu in _padded_partitions(mu.weight, n):
            count = 0
            for perm in set(itertools.permutations(nu.parts)):
                gaps = [b - a for a, b in zip(perm, mu.parts)]
                if all(g > 0 and g % 2 for g in gaps):
                    count += (-1) ** sum((g - 1) // 2 for g in gaps)
            assert weighted_m_times_h_total(n, mu.parts, nu.parts, 2, 1) == Cyclotomic.rational(field_order(2), count)


def test_weighted_empty_partitions():
    assert weighted_m_times_h_coeff(2, (0, 0), (0, 0), 3, 1, (0, 0)) == 1
