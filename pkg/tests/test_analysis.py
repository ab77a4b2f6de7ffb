import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from xyge.analysis import (CurveSamples, convention_probe, critical_report, derivative_curve,
                           evaluate_point, fubini_study_check, h_s_index, jump_ratio, sweep_curve)
from xyge.model import ModelParams
from xyge.thermo import LN2, SELECTED_CONVENTION


@pytest.mark.parametrize("mode,n", [("thermo", None), ("finite", 8), ("exact", 6)])
def test_row_invariants(mode, n):
    row = evaluate_point(mode, ModelParams(0.6, 0.8), n)
    assert row.re_eps_c == row.epsilon
    assert abs(row.im_eps_c + row.delta_beta / LN2) < 1e-15
    assert abs(row.delta_beta - (row.beta_g - row.beta_p)) < 1e-15
    assert row.n_sites == n and row.mode == mode


def test_evaluate_point_errors():
    with pytest.raises(ValueError):
        evaluate_point("finite", ModelParams(1.0, 1.0))
    with pytest.raises(ValueError):
        evaluate_point("bogus", ModelParams(1.0, 1.0), 8)


def test_finite_matches_exact():
    for h in (0.4, 0.9, 1.3):
        a = evaluate_point("finite", ModelParams(0.8, h), 8)
        b = evaluate_point("exact", ModelParams(0.8, h), 8)
        for name in ("epsilon", "xi_max", "beta_g", "beta_p", "delta_beta"):
            assert abs(getattr(a, name) - getattr(b, name)) < 1e-6, name


def test_curve_validation():
    with pytest.raises(ValueError):
        CurveSamples([0.0, 1.0], [1.0])
    with pytest.raises(ValueError):
        CurveSamples([0.0, 0.0, 1.0], [1.0, 2.0, 3.0])


@given(st.lists(st.floats(0.01, 1.0), min_size=3, max_size=20), st.floats(-3, 3), st.floats(-3, 3))
def test_derivative_exact_for_quadratics(steps, a, b):
    x = np.cumsum(steps)
    y = a * x**2 + b * x + 1.0
    d = derivative_curve(CurveSamples(x, y)).ordinates
    assert np.allclose(d, 2 * a * x + b, atol=1e-8 * (1 + np.abs(x).max()) ** 2)


def test_jump_ratio_detects_kink():
    x = np.linspace(0, 2, 201)
    kink = np.abs(x - 1.0)
    smooth = np.sin(x)
    k = 100
    assert jump_ratio(derivative_curve(CurveSamples(x, kink)).ordinates, k) > 10
    assert jump_ratio(derivative_curve(CurveSamples(x, smooth)).ordinates, k) < 10


def test_h_s_index():
    h = np.array([0.9, 1.0, 1.1, 1.2, 1.3])
    assert h_s_index(h, [0.5, 0.3, 0.0, 0.0, 0.0]) == 2
    assert h_s_index(h, [0.5, 0.3, 0.2, 0.1, 0.05]) is None


def test_critical_report_ising():
    h = np.round(np.arange(0.8, 1.3, 5e-3), 12)
    curve = sweep_curve("epsilon", 1.0, h)
    xi = sweep_curve("xi_max", 1.0, h)
    rep = critical_report(h, curve.ordinates, xi.ordinates)
    assert 0.98 <= rep.h_peak <= 1.02
    assert 1.17 < rep.h_s_estimate < 1.19 and rep.cusp_flag


@given(st.floats(0.01, 1.0))
def test_fubini_study(lam):
    d, quad = fubini_study_check(lam)
    assert abs(math.cos(d) - lam) < 1e-12
    assert abs(quad - lam) <= d**4 / 24 + 1e-12


def test_fubini_study_domain():
    with pytest.raises(ValueError):
        fubini_study_check(0.0)


def test_convention_probe_selects_applied_default():
    probe = convention_probe(chain_sizes=(6, 8))
    assert probe.selected == SELECTED_CONVENTION
    assert set(probe.per_size.values()) == {SELECTED_CONVENTION}
    assert probe.residuals["2pi"] > 0.1


def test_convention_probe_grid_guard():
    with pytest.raises(ValueError):
        convention_probe(chain_sizes=(6,), h_grid=(1.2,))
    with pytest.raises(ValueError):
        convention_probe(chain_sizes=(7,))


@given(st.floats(-3, 3), st.floats(-3, 3))
def test_derivative_linear(a, b):
    x = np.cumsum(np.linspace(0.01, 0.05, 30))
    f, g = np.sin(3 * x), np.exp(x)
    df = derivative_curve(CurveSamples(x, f)).ordinates
    dg = derivative_curve(CurveSamples(x, g)).ordinates
    d = derivative_curve(CurveSamples(x, a * f + b * g)).ordinates
    assert np.allclose(d, a * df + b * dg, rtol=0, atol=1e-12 * (1 + abs(a) + abs(b)) * 100)


@pytest.mark.parametrize("r", [1.0, 0.5])
def test_critical_detection_grid_stable(r):
    from xyge.analysis import detect_critical_features
    coarse = np.round(np.arange(0.8, 1.3 + 1e-9, 1e-2), 12)
    fine = np.round(np.arange(0.8, 1.3 + 1e-9, 5e-3), 12)
    a = detect_critical_features(r, h_grid=coarse).h_peak
    b = detect_critical_features(r, h_grid=fine).h_peak
    assert abs(a - b) < 1e-2
