import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from xyge.optimize import golden_section, maximize_unimodal
from xyge.quadrature import QuadratureError, adapt_mesh, graded_breakpoints, integrate


@given(st.floats(0.0, math.pi))
def test_maximize_parabola(peak):
    best = maximize_unimodal(lambda x: -(x - peak) ** 2, 0.0, math.pi, derivative=lambda x: -2 * (x - peak))
    assert abs(best.argmax - peak) < 1e-9


@given(st.floats(0.1, 3.0))
def test_golden_section_without_derivative(peak):
    best = golden_section(lambda x: -abs(x - peak), 0.0, math.pi, tol=1e-10)
    assert abs(best.argmax - peak) < 1e-9


def test_ties_go_to_smaller_argument():
    assert maximize_unimodal(lambda x: 1.0, 0.0, 1.0).argmax == 0.0
    # plateau on [0, 0.5]
    assert maximize_unimodal(lambda x: -max(x - 0.5, 0.0), 0.0, 1.0).argmax == 0.0


def test_boundary_maximum():
    best = maximize_unimodal(lambda x: -x, 0.0, 2.0)
    assert best.argmax == 0.0 and best.value == 0.0
    best = maximize_unimodal(lambda x: x, 0.0, 2.0)
    assert abs(best.argmax - 2.0) < 1e-10


def test_empty_interval():
    with pytest.raises(ValueError):
        maximize_unimodal(lambda x: x, 1.0, 1.0)


def test_graded_breakpoints():
    pts = graded_breakpoints(levels=10, interior=(0.3,))
    assert pts[0] == 0.0 and pts[-1] == 0.5 and 0.3 in pts
    assert np.all(np.diff(pts) > 0)
    assert pts[1] == 0.5 * 0.5**10


@pytest.mark.parametrize("func,exact", [
    (lambda x: np.log(x), 0.5 * math.log(0.5) - 0.5),
    (lambda x: np.log(np.sin(np.pi * x)), -0.5 * math.log(2.0)),
    (lambda x: np.log(0.5 - x), 0.5 * math.log(0.5) - 0.5),
    (lambda x: np.sqrt(x), (2.0 / 3.0) * 0.5**1.5),
])
def test_endpoint_singular_integrals(func, exact):
    value, err = integrate(func, graded_breakpoints(), 1e-12)
    assert abs(value - exact) < 1e-11
    assert err < 1e-12


def test_interior_kink():
    value, _ = integrate(lambda x: np.abs(x - 0.2), graded_breakpoints(interior=(0.2,)), 1e-12)
    assert abs(value - (0.02 + 0.045)) < 1e-13


def test_refinement_limit():
    with pytest.raises(QuadratureError) as info:
        adapt_mesh(lambda x: np.atleast_2d(np.sin(1.0 / (x + 1e-3))), graded_breakpoints(levels=2),
                   1e-14, max_intervals=50)
    assert info.value.error_estimate > 0


@given(st.floats(0.01, 0.5))
def test_polish_when_bracket_starts_at_symmetry_point(peak):
    # f is even about 0, so its derivative vanishes at the left end of the bracket
    f = lambda x: -((x * x - peak * peak) ** 2)
    df = lambda x: -4 * x * (x * x - peak * peak)
    best = maximize_unimodal(f, 0.0, math.pi, derivative=df)
    assert abs(best.argmax - peak) < 1e-13
