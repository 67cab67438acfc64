from fractions import Fraction

import pytest

from largegenus.wave import (
    AIRY,
    BESSEL,
    WaveModel,
    airy_coeffs,
    bessel_coeffs,
    component,
    rairy,
    rairy_closure_residual,
    rairy_coeffs,
    rspin_stokes,
    wronskian_check,
)


def test_airy_first_coefficients():
    psi, dpsi = airy_coeffs(2).table
    assert psi[:2] == (1, Fraction(5, 72))
    assert dpsi[1] == Fraction(5, 72) * Fraction(7, -5)


def test_bessel_first_coefficients():
    psi, _ = bessel_coeffs(2).table
    assert psi == (1, Fraction(1, 8), Fraction(9, 128))


@pytest.mark.parametrize("r", [2, 3, 4, 5])
def test_rairy_leading_ones(r):
    tab = rairy_coeffs(r, 4).table
    assert all(row[0] == 1 for row in tab)


@pytest.mark.parametrize("r", [2, 3, 4, 5])
def test_rairy_closure(r):
    assert all(c == 0 for c in rairy_closure_residual(r, 10))


def test_r2_specialises_to_airy():
    assert rairy_coeffs(2, 15).table == airy_coeffs(15).table


@pytest.mark.parametrize("r", [2, 3, 4, 5])
def test_wronskian_rairy(r):
    assert wronskian_check(rairy(r), 12)


@pytest.mark.parametrize("model", [AIRY, BESSEL], ids=["airy", "bessel"])
def test_wronskian_airy_bessel(model):
    assert wronskian_check(model, 12)


@pytest.mark.parametrize("model", [AIRY, BESSEL], ids=["airy", "bessel"])
def test_psi_minus_is_psi_plus_at_minus_hbar(model):
    plus = component(model, ("psi", 1), 8)
    minus = component(model, ("psi", -1), 8)
    assert minus.seq == plus.flip().seq


def test_dual_functions_flip_hbar():
    m = rairy(4)
    for alpha in range(1, 5):
        for k in range(4):
            assert component(m, ("phi", alpha, k), 6).seq == component(m, ("psi", alpha, k), 6).flip().seq


@pytest.mark.parametrize("r,alpha,want", [(3, 1, -1j), (4, 1, -1), (4, 2, -1j), (5, 1, 1j)])
def test_stokes_phase(r, alpha, want):
    assert abs(complex(rspin_stokes(r, alpha)) - want) < 1e-14


def test_model_validation():
    with pytest.raises(ValueError):
        WaveModel("hermite")
    with pytest.raises(ValueError):
        WaveModel("airy", 3)
    with pytest.raises(ValueError):
        rairy_coeffs(1, 3)


def test_json_dump_is_exact():
    js = rairy_coeffs(3, 2).to_json()
    assert js["table"]["m=0"][0] == "1/1"
    assert airy_coeffs(1).to_json()["table"]["psi"] == ["1/1", "5/72"]
