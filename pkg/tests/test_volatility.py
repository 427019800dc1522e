import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gametree.errors import BoundViolationError, ValidationError
from gametree.volatility import VolatilityModel, make_constant, make_truncated_cev, model_from_config, psi


def test_psi_truncated_cev_at_100(cev):
    assert psi(cev, math.log(100.0)) == pytest.approx(1.0 / 3.0, abs=1e-12)


def test_psi_upper_clip(cev):
    assert psi(cev, math.log(900.0)) == 0.5


def test_psi_constant():
    assert psi(make_constant(0.3), 7.25) == 0.3


@pytest.mark.parametrize("s, expected", [
    (2.25, 0.05),
    (225.0, 0.5),
    (80.0, 0.29814239699997196),  # mpmath, 50 digits
])
def test_truncated_cev_values(cev, s, expected):
    assert cev.evaluate(s) == pytest.approx(expected, abs=1e-15)


def test_truncated_cev_bounds(cev):
    assert (cev.sigma_min, cev.sigma_max) == (0.05, 0.5)


def test_make_constant():
    m = make_constant(0.3)
    assert m.evaluate(1e6) == 0.3
    assert m.sigma_max == 0.3 and m.sigma_min == 0.3


@pytest.mark.parametrize("bad", [0.0, -0.1, math.inf, math.nan])
def test_make_constant_rejects(bad):
    with pytest.raises(ValidationError):
        make_constant(bad)


def test_bound_violation_carries_location():
    model = VolatilityModel(lambda s: 0.2 + 0.0 * s, 0.05, 0.1)
    with pytest.raises(BoundViolationError) as info:
        model.psi(1.5)
    assert info.value.z == pytest.approx(1.5)
    assert info.value.value == pytest.approx(0.2)


def test_invalid_declared_bounds():
    with pytest.raises(ValidationError):
        VolatilityModel(lambda s: s, 0.0, 1.0)
    with pytest.raises(ValidationError):
        VolatilityModel(lambda s: s, 0.5, 0.1)


def test_model_from_config():
    assert model_from_config({"kind": "truncated_cev"}).description == "truncated_cev"
    assert model_from_config({"kind": "constant", "sigma": 0.3}).sigma_max == 0.3
    with pytest.raises(ValidationError):
        model_from_config({"kind": "heston"})


@given(st.floats(min_value=1e-300, max_value=1e6, allow_subnormal=False))
def test_cev_within_bounds(s):
    v = make_truncated_cev().evaluate(s)
    assert 0.05 <= v <= 0.5


@given(st.floats(min_value=1e-12, max_value=1e6))
def test_psi_matches_sigma(s):
    m = make_truncated_cev()
    assert m.psi(math.log(s)) == pytest.approx(m.evaluate(s), rel=1e-13)


@given(st.floats(2.25, 225.0), st.floats(2.25, 225.0))
def test_cev_monotone_on_unclipped_region(s1, s2):
    m = make_truncated_cev()
    lo, hi = sorted((s1, s2))
    assert m.evaluate(lo) <= m.evaluate(hi)


def test_vectorized_evaluation(cev):
    s = np.array([1.0, 100.0, 1e4])
    assert np.allclose(cev.evaluate(s), [0.05, 1 / 3, 0.5])
