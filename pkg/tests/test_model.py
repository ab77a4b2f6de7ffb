import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from xyge.model import (ChainSpec, IndeterminateAngle, ModelParams, half_angle_cos_sin, log_half_angle_cos_sin,
                        quasi_momenta, theta_array, theta_continuum, theta_modes)

mus = st.floats(1e-9, 0.5)
rs = st.floats(0.0, 1.0)
hs = st.floats(0.0, 5.0)

# 30-digit mpmath evaluations of atan2(r sin 2 pi mu, h - cos 2 pi mu) / 2
THETA_REFERENCE = [
    (0.1, 1.0, 0.5, 1.0274081481064428566),
    (0.3, 0.5, 1.2, 0.152637050832051561),
    (0.25, 0.05, 0.9, 0.027749252622858418633),
    (0.45, 1.0, 2.0, 0.052166894447252237467),
]


def test_params_validation():
    ModelParams(0.0, 0.0)
    ModelParams(1.0, 10.0)
    for r, h in [(-0.1, 1.0), (1.1, 1.0), (0.5, -1e-9), (math.nan, 1.0), (0.5, math.inf)]:
        with pytest.raises(ValueError):
            ModelParams(r, h)
    assert ModelParams(0.5, 1.0).shifted(0.1, -0.5) == ModelParams(0.6, 0.5)


def test_chain_spec():
    assert ChainSpec(8).n_modes == 4
    assert ChainSpec(9).n_modes == 4
    assert not ChainSpec(9).is_even
    for bad in (3, 0, 4.5):
        with pytest.raises(ValueError):
            ChainSpec(bad)
    with pytest.raises(ValueError, match="even"):
        ChainSpec(7).require_even()


@pytest.mark.parametrize("mu,r,h,expected", THETA_REFERENCE)
def test_theta_reference_values(mu, r, h, expected):
    assert abs(theta_continuum(mu, ModelParams(r, h)) - expected) < 1e-14


def test_theta_domain_and_indeterminate():
    p = ModelParams(0.5, 1.0)
    for mu in (0.0, -0.1, 0.51):
        with pytest.raises(ValueError):
            theta_continuum(mu, p)
    with pytest.raises(IndeterminateAngle):
        theta_continuum(0.2, ModelParams(0.0, 1.0 - 2.0 * math.sin(0.2 * math.pi) ** 2))


def test_critical_field_has_no_spurious_modes():
    # at r = 0, h = 1 every mu > 0 has theta = 0, however small mu is
    mu = np.logspace(-15, -1, 50)
    assert np.all(theta_array(mu, ModelParams(0.0, 1.0)) == 0.0)


def test_ising_zero_field_is_quarter_turn():
    # h = 0, r = 1: 2 theta = pi - 2 pi mu
    mu = np.linspace(0.01, 0.5, 30)
    assert np.allclose(theta_array(mu, ModelParams(1.0, 0.0)), 0.5 * np.pi - np.pi * mu, atol=1e-15)


@given(mus, rs, hs)
def test_theta_range(mu, r, h):
    t = theta_array(mu, ModelParams(r, h))
    assert 0.0 <= t <= 0.5 * math.pi


@given(mus, rs, hs)
def test_half_angle_matches_theta(mu, r, h):
    p = ModelParams(r, h)
    c, s = half_angle_cos_sin(mu, p)
    assert abs(c * c + s * s - 1.0) < 1e-14
    t = theta_array(mu, p)
    assert abs(c - math.cos(t)) < 1e-12 and abs(s - math.sin(t)) < 1e-12


@given(mus, rs, hs)
def test_log_half_angle_matches(mu, r, h):
    p = ModelParams(r, h)
    c, s = half_angle_cos_sin(mu, p)
    lc, ls = log_half_angle_cos_sin(mu, p)
    for value, log_value in ((c, lc), (s, ls)):
        if value > 1e-150:
            assert abs(log_value - math.log(value)) < 1e-12 * max(1.0, abs(log_value))


def test_log_half_angle_below_underflow():
    # cos theta ~ y / (2 |x|) with y = r sin 2 pi mu: cos^2 underflows, its log does not
    lc, ls = log_half_angle_cos_sin(0.1, ModelParams(1e-200, 0.0))
    expected = math.log(1e-200 * math.sin(0.2 * math.pi) / (2 * math.cos(0.2 * math.pi)))
    assert abs(lc - expected) < 1e-12 * abs(expected) and abs(ls) < 1e-15


def test_half_angle_keeps_relative_accuracy():
    # strong field: sin theta ~ r sin(2 pi mu) / (2 h), far below cos theta's ulp
    c, s = half_angle_cos_sin(0.1, ModelParams(1.0, 1e9))
    expected = math.sin(2 * math.pi * 0.1) / (2 * (1e9 - math.cos(2 * math.pi * 0.1)))
    assert abs(s / expected - 1) < 1e-12


@given(st.floats(0.0, 1.0), st.floats(0.0, 3.0), st.floats(0.0, 1.0))
def test_theta_non_increasing_in_field(r, h, dh):
    mu = np.linspace(0.01, 0.5, 40)
    lo = theta_array(mu, ModelParams(r, h))
    hi = theta_array(mu, ModelParams(r, h + dh))
    assert np.all(hi <= lo + 1e-15)


def test_mode_angles():
    chain = ChainSpec(10)
    mu = quasi_momenta(chain)
    assert np.allclose(mu, (2 * np.arange(5) + 1) / 20)
    angles = theta_modes(chain, ModelParams(0.7, 0.4))
    assert len(angles) == 5 and not angles.indeterminate.any()


def test_mode_indeterminate_flag():
    # mu_1 = 3/16; 1 - 2 sin^2(pi mu) is exact there, so the field hits the mode exactly
    chain = ChainSpec(8)
    h = 1.0 - 2.0 * math.sin(math.pi * quasi_momenta(chain)[1]) ** 2
    angles = theta_modes(chain, ModelParams(0.0, h))
    assert angles.indeterminate.tolist() == [False, True, False, False]
    with pytest.raises(IndeterminateAngle):
        theta_modes(chain, ModelParams(0.0, h), strict=True)


@given(st.floats(1e-3, 0.5), st.floats(0.01, 1.0))
def test_strong_field_limit(mu, r):
    assert theta_continuum(mu, ModelParams(r, 1e6)) < 1e-6


@given(st.floats(1e-3, 0.5), st.floats(0.0, 2.0))
def test_xx_step_structure(mu, h):
    x = h - math.cos(2 * math.pi * mu)
    if abs(x) < 1e-12:
        return  # indeterminate locus
    expected = 0.0 if x > 0 else 0.5 * math.pi
    assert theta_continuum(mu, ModelParams(0.0, h)) == expected


@given(st.sampled_from([4, 6, 10, 64]), st.floats(0.0, 1.0), st.floats(0.0, 3.0))
def test_modes_match_continuum(n, r, h):
    angles = theta_modes(ChainSpec(n), ModelParams(r, h))
    for mu, t, bad in zip(angles.quasi_momenta, angles.angles, angles.indeterminate):
        if not bad:
            assert t == theta_continuum(mu, ModelParams(r, h))
