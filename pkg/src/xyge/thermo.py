"""Thermodynamic-limit densities: geometric entanglement, geometric phases, complex GE.

All quantities are integrals over the quasi-momentum mu in (0, 1/2] of functions
of the Bogoliubov angle. The closest product state has every spin at polar
angle xi; its log-overlap density is

    L(xi) = int_0^{1/2} ln[cos th cos^2(xi/2) + sin th sin^2(xi/2) cot(pi mu)] dmu

and the GE density is -(2 / ln 2) max_xi L(xi).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import ModelParams, half_angle_cos_sin, log_half_angle_cos_sin
from .optimize import maximize_unimodal
from .quadrature import QuadratureError, adapt_mesh, graded_breakpoints, integrate

LN2 = math.log(2.0)
TOL_QUAD = 1e-10
TOL_OPT = 1e-10
XI_COARSE_POINTS = 33

# Per-site phase of the product-state path, beta_p = factor * sin^2(xi_max / 2).
# "pi" is the rotation over phi in [0, pi] (the same extent as the ground-state
# loop); "2pi" is the closed loop phi in [0, 2 pi]. The default is the outcome of
# analysis.convention_probe, which the test suite re-runs against the oracle.
BETA_P_CONVENTIONS = {"pi": math.pi, "2pi": 2.0 * math.pi}
SELECTED_CONVENTION = "pi"


@dataclass(frozen=True)
class GEResult:
    epsilon: float
    xi_max: float
    lambda_log: float


@dataclass(frozen=True)
class GPDensities:
    beta_g: float
    beta_p: float
    delta_beta: float


@dataclass(frozen=True)
class ComplexGEDensity:
    value: complex

    @property
    def real(self) -> float:
        return self.value.real

    @property
    def imag(self) -> float:
        return self.value.imag


@dataclass(frozen=True)
class GeometricRecord:
    params: ModelParams
    epsilon: float
    xi_max: float
    beta_g: float
    beta_p: float
    delta_beta: float

    @property
    def eps_c(self) -> complex:
        return complex(self.epsilon, -self.delta_beta / LN2)


def critical_momentum(h: float) -> float | None:
    """mu* with cos 2 pi mu* = h, where theta crosses pi/4; None for h >= 1."""
    if h >= 1.0:
        return None
    return math.acos(h) / (2.0 * math.pi)


def _breakpoints(params: ModelParams) -> np.ndarray:
    mu_star = critical_momentum(params.h)
    return graded_breakpoints(interior=() if mu_star is None else (mu_star,))


def log_weights(xi):
    """(ln cos^2(xi/2), ln sin^2(xi/2)); logs first, so tiny xi never goes subnormal."""
    half = 0.5 * np.asarray(xi, dtype=float)
    with np.errstate(divide="ignore"):
        return 2.0 * np.log(np.cos(half)), 2.0 * np.log(np.sin(half))


def log_bracket_from_logs(log_a, log_b, xi):
    """ln(a cos^2(xi/2) + b sin^2(xi/2)) given ln a and ln b."""
    lc2, ls2 = log_weights(xi)
    return np.logaddexp(log_a + lc2, log_b + ls2)


def _safe_log(x):
    with np.errstate(divide="ignore"):
        return np.log(x)


def log_bracket(a, b, xi):
    """ln(a cos^2(xi/2) + b sin^2(xi/2)) for non-negative a, b; -inf where both terms vanish."""
    return log_bracket_from_logs(_safe_log(np.asarray(a, dtype=float)), _safe_log(np.asarray(b, dtype=float)), xi)


def _mode_terms(mu, params: ModelParams):
    """(cos theta, sin theta cot pi mu) at the given momenta."""
    cos_t, sin_t = half_angle_cos_sin(mu, params)
    return cos_t, sin_t / np.tan(np.pi * mu)


def _log_mode_terms(mu, params: ModelParams):
    """Logs of ``_mode_terms``."""
    log_cos, log_sin = log_half_angle_cos_sin(mu, params)
    return log_cos, log_sin - np.log(np.tan(np.pi * np.asarray(mu, dtype=float)))


def ge_integrand(mu: float, xi: float, params: ModelParams) -> float:
    """ln[cos th cos^2(xi/2) + sin th sin^2(xi/2) cot pi mu]; -inf if the bracket vanishes."""
    if not 0.0 < mu < 0.5:
        raise ValueError(f"quasi-momentum must lie in (0, 1/2), got {mu}")
    if not 0.0 <= xi <= math.pi:
        raise ValueError(f"xi must lie in [0, pi], got {xi}")
    return float(log_bracket_from_logs(*_log_mode_terms(mu, params), xi))


def log_overlap_density(xi: float, params: ModelParams, tol: float = TOL_QUAD) -> float:
    """L(xi), the mu-integral of ``ge_integrand``, to absolute accuracy ``tol``."""
    if not 0.0 <= xi <= math.pi:
        raise ValueError(f"xi must lie in [0, pi], got {xi}")

    def f(mu):
        return log_bracket_from_logs(*_log_mode_terms(mu, params), xi)

    value, err = integrate(f, _breakpoints(params), tol)
    if err > tol:
        raise QuadratureError("log-overlap integral did not converge", err)
    return value


class LogOverlap:
    """L(xi) and dL/dxi on one mesh adapted to a fan of xi values.

    Reusing the mesh keeps the objective a smooth function of xi, which the
    maximiser needs; ``error(xi)`` reports the quadrature error at any xi.
    """

    PROBE_XI = np.linspace(0.0, math.pi, 9)

    def __init__(self, params: ModelParams, tol: float = TOL_QUAD):
        self.params = params
        self.tol = tol

        def fan(mu):
            log_a, log_b = _log_mode_terms(mu, params)
            return log_bracket_from_logs(log_a[None, :], log_b[None, :], self.PROBE_XI[:, None])

        self.mesh = adapt_mesh(fan, _breakpoints(params), tol)
        self._a, self._b = _mode_terms(self.mesh.nodes, params)
        self._log_a, self._log_b = _log_mode_terms(self.mesh.nodes, params)
        self._log_a_lo, self._log_b_lo = _log_mode_terms(self.mesh.nodes_lo, params)

    def __call__(self, xi: float) -> float:
        return float(np.dot(self.mesh.weights, log_bracket_from_logs(self._log_a, self._log_b, xi)))

    def derivative(self, xi: float) -> float:
        sin_xi = math.sin(xi)
        if sin_xi == 0.0:
            return 0.0
        c2, s2 = math.cos(xi / 2) ** 2, math.sin(xi / 2) ** 2
        bracket = self._a * c2 + self._b * s2
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = (self._b - self._a) / bracket
        return float(0.5 * sin_xi * np.dot(self.mesh.weights, ratio))

    def error(self, xi: float) -> float:
        hi = log_bracket_from_logs(self._log_a, self._log_b, xi)
        lo = log_bracket_from_logs(self._log_a_lo, self._log_b_lo, xi)
        return float(self.mesh.interval_errors(hi, lo).sum())


def optimize_xi(params: ModelParams, tol_quad: float = TOL_QUAD,
                tol_opt: float = TOL_OPT) -> tuple[float, float]:
    """(xi_max, L(xi_max)) over xi in [0, pi]; ties go to the smaller xi."""
    objective = LogOverlap(params, tol_quad)
    best = maximize_unimodal(objective, 0.0, math.pi, coarse_points=XI_COARSE_POINTS,
                             tol=tol_opt, derivative=objective.derivative)
    err = objective.error(best.argmax)
    if err > tol_quad:
        # the fan did not cover this xi well enough; integrate it on its own
        return best.argmax, log_overlap_density(best.argmax, params, tol_quad)
    return best.argmax, best.value


def ge_density(params: ModelParams, tol_quad: float = TOL_QUAD, tol_opt: float = TOL_OPT) -> GEResult:
    xi_max, lam = optimize_xi(params, tol_quad, tol_opt)
    if lam > tol_quad:
        raise QuadratureError("maximised log-overlap is positive beyond tolerance", lam)
    lam = min(lam, 0.0)
    return GEResult(epsilon=0.0 - (2.0 / LN2) * lam if lam < 0 else 0.0, xi_max=xi_max, lambda_log=lam)


def gp_density_ground(params: ModelParams, tol: float = TOL_QUAD) -> float:
    """beta_g = 2 pi int_0^{1/2} sin^2 theta dmu."""

    def f(mu):
        _, sin_t = half_angle_cos_sin(mu, params)
        return sin_t**2

    value, err = integrate(f, _breakpoints(params), tol / (2 * math.pi))
    if 2 * math.pi * err > tol:
        raise QuadratureError("ground-state phase integral did not converge", 2 * math.pi * err)
    return 2.0 * math.pi * value


def beta_p_from_xi(xi_max: float, convention: str = SELECTED_CONVENTION) -> float:
    try:
        factor = BETA_P_CONVENTIONS[convention]
    except KeyError:
        raise ValueError(f"unknown beta_p convention {convention!r}") from None
    return factor * math.sin(xi_max / 2) ** 2


def gp_density_product(params: ModelParams, convention: str = SELECTED_CONVENTION,
                       xi_max: float | None = None) -> float:
    """beta_p of the closest product state; ``xi_max`` is computed when not supplied."""
    if xi_max is None:
        xi_max, _ = optimize_xi(params)
    return beta_p_from_xi(xi_max, convention)


def gp_delta(params: ModelParams, convention: str = SELECTED_CONVENTION,
             xi_max: float | None = None) -> GPDensities:
    beta_g = gp_density_ground(params)
    beta_p = gp_density_product(params, convention, xi_max)
    return GPDensities(beta_g=beta_g, beta_p=beta_p, delta_beta=beta_g - beta_p)


def complex_ge_density(params: ModelParams, convention: str = SELECTED_CONVENTION) -> ComplexGEDensity:
    """epsilon_c = epsilon - i delta_beta / ln 2."""
    ge = ge_density(params)
    gp = gp_delta(params, convention, xi_max=ge.xi_max)
    return ComplexGEDensity(complex(ge.epsilon, -gp.delta_beta / LN2))


def geometric_record(params: ModelParams, convention: str = SELECTED_CONVENTION,
                     tol_quad: float = TOL_QUAD, tol_opt: float = TOL_OPT) -> GeometricRecord:
    """All densities at one parameter point, sharing the xi optimisation."""
    ge = ge_density(params, tol_quad, tol_opt)
    gp = gp_delta(params, convention, xi_max=ge.xi_max)
    return GeometricRecord(params=params, epsilon=ge.epsilon, xi_max=ge.xi_max,
                           beta_g=gp.beta_g, beta_p=gp.beta_p, delta_beta=gp.delta_beta)
