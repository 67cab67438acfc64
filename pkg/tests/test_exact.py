import cmath
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from largegenus.exact import (
    Cyclotomic,
    InconsistentSystem,
    Multiplicities,
    cyclo_embed,
    cyclotomic_poly,
    decode_scalar,
    encode_scalar,
    falling_factorial,
    frac_from_str,
    frac_to_str,
    r_factorial,
    rspin_genus,
    solve_exact,
)

fracs = st.builds(Fraction, st.integers(-99, 99), st.integers(1, 50))


def cyclos(N):
    deg = len(cyclotomic_poly(N)) - 1
    return st.lists(fracs, min_size=deg, max_size=deg).map(lambda cs: Cyclotomic(N, tuple(cs)))


orders = st.sampled_from([3, 4, 5, 6, 8, 12])


def test_r_factorial_values():
    assert r_factorial(7, 2) == 105
    assert r_factorial(7, 3) == 28
    assert r_factorial(1, 5) == 1
    assert r_factorial(10, 4) == 10 * 6 * 2


@pytest.mark.parametrize("m,r", [(0, 2), (-3, 3), (5, 1)])
def test_r_factorial_rejects(m, r):
    with pytest.raises(ValueError):
        r_factorial(m, r)


def test_falling_factorial():
    assert falling_factorial(5, 0) == 1
    assert falling_factorial(5, 3) == 60
    assert falling_factorial(Fraction(1, 2), 2) == Fraction(-1, 4)


def test_cyclotomic_polys():
    assert cyclotomic_poly(1) == (-1, 1)
    assert cyclotomic_poly(4) == (1, 0, 1)
    assert cyclotomic_poly(6) == (1, -1, 1)
    assert cyclotomic_poly(12) == (1, 0, -1, 0, 1)


@given(st.data(), orders)
def test_field_axioms(data, N):
    a, b, c = (data.draw(cyclos(N)) for _ in range(3))
    assert (a + b) * c == a * c + b * c
    assert (a * b) * c == a * (b * c)
    if not a.is_zero():
        assert a * a.inverse() == Cyclotomic.one(N)


@given(st.data(), orders)
def test_embedding_is_a_ring_map(data, N):
    a, b = data.draw(cyclos(N)), data.draw(cyclos(N))
    assert abs(complex(a * b) - complex(a) * complex(b)) < 1e-6 * (1 + abs(complex(a)) * abs(complex(b)))
    assert abs(complex(a + b) - complex(a) - complex(b)) < 1e-9 * (1 + abs(complex(a)) + abs(complex(b)))


@pytest.mark.parametrize("N", [3, 4, 5, 8, 12])
def test_root_of_unity(N):
    z = Cyclotomic.root(N)
    assert z**N == Cyclotomic.one(N)
    assert abs(complex(z) - cmath.exp(2j * cmath.pi / N)) < 1e-14
    assert z.conjugate() * z == Cyclotomic.one(N)


def test_rational_value_detects_rationals():
    z = Cyclotomic.root(8)
    assert (z + z.conjugate()).rational_value() is None  # sqrt(2)
    assert ((z + z.conjugate()) ** 2).rational_value() == 2


def test_high_precision_embedding():
    z = Cyclotomic.root(12, 1)
    v = cyclo_embed(z * z.conjugate(), 40)
    assert abs(v - 1) < 1e-38


@given(fracs)
def test_fraction_string_round_trip(q):
    assert frac_from_str(frac_to_str(q)) == q


@given(st.data(), orders)
def test_scalar_json_round_trip(data, N):
    a = data.draw(cyclos(N))
    assert decode_scalar(encode_scalar(a)) == a


def test_solve_exact_overdetermined():
    rows = [[1, 1], [1, -1], [2, 0]]
    rhs = [[3], [1], [4]]
    assert solve_exact(rows, rhs) == [[2], [1]]
    with pytest.raises(InconsistentSystem):
        solve_exact(rows, [[3], [1], [5]])


def test_multiplicities():
    p = Multiplicities.from_tuple((0, 0, 3, 1))
    assert p.n == 4 and p[0] == 2 and p[1] == 1 and p[2] == 0
    assert Multiplicities.from_list(2, [1, 0]) == Multiplicities(2, ((0, 1),))
    with pytest.raises(ValueError):
        Multiplicities.from_list(1, [1, 1])


def test_rspin_genus():
    assert rspin_genus(3, (0, 0, 0), (1, 1, 2)) == 0
    assert rspin_genus(3, (6,), (2,)) == 3
    with pytest.raises(ValueError):
        rspin_genus(3, (2,), (1,))
    with pytest.raises(ValueError):
        rspin_genus(3, (1,), (3,))
