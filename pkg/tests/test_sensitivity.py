from fractions import Fraction

import pytest
from hypothesis import assume, given, strategies as st

from dbsim.core import ConfigError
from dbsim.sensitivity import (
    MANUFACTURER_N_G,
    NonPhysicalError,
    SensitivityInputs,
    compute_de,
    compute_ds,
)


def test_published_ds():
    r = compute_ds(SensitivityInputs(5033, 25000, 0.333))
    assert r.ds == pytest.approx(0.2158, abs=5e-5)
    assert round(r.ds, 3) == 0.216
    assert r.n_b == pytest.approx(5033 * 0.333)


def test_perfect_detector():
    assert compute_ds(SensitivityInputs(25000, 25000, 0.0)).ds == 1.0


def test_ds_with_analytic_photons_value():
    # exact rational evaluation of 5033 / (25000 - 5033 * 0.3)
    exact = Fraction(5033) / (Fraction(25000) - Fraction(5033) * Fraction(3, 10))
    r = compute_ds(SensitivityInputs(5033, 25000, 0.300))
    assert r.ds == pytest.approx(float(exact), rel=1e-14)
    assert round(r.ds, 4) == 0.2143


def test_zero_registrations():
    assert compute_ds(SensitivityInputs(0, 25000, 0.3)).ds == 0


@pytest.mark.parametrize(
    "n_g, n_0, nb",
    [(-1, 100, 0.1), (10, 0, 0.1), (10, 100, -0.1), (100, 100, 1.0), (200, 100, 0.9)],
)
def test_non_physical_inputs(n_g, n_0, nb):
    with pytest.raises(NonPhysicalError):
        compute_ds(SensitivityInputs(n_g, n_0, nb))


def test_ds_above_one_rejected():
    with pytest.raises(NonPhysicalError, match="DS"):
        compute_ds(SensitivityInputs(90, 100, 0.2))


@pytest.mark.parametrize(
    "n_p, n_0, expected",
    [(296e3, 500e3, 0.128), (59e3, 62.5e3, 0.204), (183e3, 250e3, 0.158), (52e3, 62.5e3, 0.180)],
)
def test_de_published_rows(n_p, n_0, expected):
    assert compute_de(n_p, 0.216, n_0) == pytest.approx(expected, abs=5e-4)


def test_de_zero_and_errors():
    assert compute_de(0, 0.216, 1000) == 0
    with pytest.raises(ConfigError):
        compute_de(10, 0.2, 0)
    with pytest.raises(ConfigError):
        compute_de(10, 1.2, 100)


def test_manufacturer_constant():
    assert MANUFACTURER_N_G == 5033


@given(st.floats(0, 1e6), st.floats(1, 1e7), st.floats(0, 5))
def test_bookkeeping_and_recomposition(n_g, n_0, nb):
    assume(n_g * nb < n_0 and n_g <= n_0 - n_g * nb)
    r = compute_ds(SensitivityInputs(n_g, n_0, nb))
    assert r.n_a + r.n_b + n_g == pytest.approx(n_0, rel=1e-12, abs=1e-9)
    assert r.ds * (n_0 - r.n_b) == pytest.approx(n_g, rel=1e-12, abs=1e-12)
    assert 0 <= r.ds <= 1


@given(st.floats(1, 1e4), st.floats(0, 1), st.floats(0, 1))
def test_ds_increasing_in_nb_avg(n_g, a, b):
    assume(abs(a - b) > 1e-6)
    n_0 = 10 * n_g
    lo, hi = sorted((a, b))
    assert compute_ds(SensitivityInputs(n_g, n_0, lo)).ds < compute_ds(SensitivityInputs(n_g, n_0, hi)).ds


@given(st.floats(1, 1e4), st.floats(1, 1e4), st.floats(0, 1))
def test_ds_increasing_in_n_g(a, b, nb):
    assume(abs(a - b) > 1e-3)
    n_0 = 1e5
    lo, hi = sorted((a, b))
    assert compute_ds(SensitivityInputs(lo, n_0, nb)).ds < compute_ds(SensitivityInputs(hi, n_0, nb)).ds


@given(st.floats(0, 1), st.integers(1, 10**7), st.data())
def test_de_never_exceeds_ds(ds, n_0, data):
    n_p = data.draw(st.integers(0, n_0))
    assert compute_de(n_p, ds, n_0) <= ds
