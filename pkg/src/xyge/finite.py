"""Finite even-N chains through the mode-product formula.

For even N the overlap of the even-parity ground state with the uniform
product state at polar angle xi factorises over the N/2 Bogoliubov pairs,

    Lambda(xi) = prod_m [cos th_m cos^2(xi/2) + sin th_m sin^2(xi/2) cot(pi mu_m)],

with mu_m = (2m+1) / (2N). Its (1/N) ln limit is the thermodynamic integrand.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import (ChainSpec, IndeterminateAngle, ModelParams, half_angle_cos_sin, log_half_angle_cos_sin,
                    quasi_momenta, theta_modes)
from .optimize import maximize_unimodal
from .thermo import (LN2, SELECTED_CONVENTION, TOL_OPT, XI_COARSE_POINTS, beta_p_from_xi,
                     log_bracket_from_logs)


@dataclass(frozen=True)
class FiniteGERecord:
    n_sites: int
    params: ModelParams
    lambda_max: float
    xi_max: float
    epsilon_n: float
    beta_g_n: float
    beta_p_n: float

    @property
    def delta_beta_n(self) -> float:
        return self.beta_g_n - self.beta_p_n

    @property
    def complex_ge_n(self) -> complex:
        return complex(self.epsilon_n, -self.delta_beta_n / LN2)


class ModeProduct:
    """ln Lambda(xi) and its xi-derivative for one chain and parameter point."""

    def __init__(self, chain: ChainSpec, params: ModelParams):
        chain.require_even()
        angles = theta_modes(chain, params)
        if angles.indeterminate.any():
            raise IndeterminateAngle(
                f"modes {np.flatnonzero(angles.indeterminate).tolist()} indeterminate "
                f"at N={chain.n_sites}, r={params.r}, h={params.h}"
            )
        mu = quasi_momenta(chain)
        cos_t, sin_t = half_angle_cos_sin(mu, params)
        self.chain = chain
        self.sin_t = sin_t
        self.a = cos_t
        self.b = sin_t / np.tan(np.pi * mu)
        log_cos, log_sin = log_half_angle_cos_sin(mu, params)
        self.log_a = log_cos
        self.log_b = log_sin - np.log(np.tan(np.pi * mu))

    def log_lambda(self, xi: float) -> float:
        terms = log_bracket_from_logs(self.log_a, self.log_b, xi)
        if np.any(np.isnan(terms)):
            raise FloatingPointError("non-positive factor in the mode product")
        return float(np.sum(terms))

    def derivative(self, xi: float) -> float:
        sin_xi = math.sin(xi)
        if sin_xi == 0.0:
            return 0.0
        c2, s2 = math.cos(xi / 2) ** 2, math.sin(xi / 2) ** 2
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = (self.b - self.a) / (self.a * c2 + self.b * s2)
        return float(0.5 * sin_xi * np.sum(ratio))


def lambda_finite(chain: ChainSpec, xi: float, params: ModelParams) -> float:
    """Overlap magnitude |<Phi(xi)|psi>| from the mode product, summed in logs."""
    if not 0.0 <= xi <= math.pi:
        raise ValueError(f"xi must lie in [0, pi], got {xi}")
    return math.exp(ModeProduct(chain, params).log_lambda(xi))


def optimize_xi_finite(chain: ChainSpec, params: ModelParams, tol: float = TOL_OPT) -> tuple[float, float]:
    """(xi_max, ln Lambda_max)."""
    prod = ModeProduct(chain, params)
    best = maximize_unimodal(prod.log_lambda, 0.0, math.pi, coarse_points=XI_COARSE_POINTS,
                             tol=tol, derivative=prod.derivative)
    return best.argmax, best.value


def gp_per_site_finite(chain: ChainSpec, params: ModelParams) -> float:
    """beta_N^g = (2 pi / N) sum_m sin^2 theta_m."""
    chain.require_even()
    _, sin_t = half_angle_cos_sin(quasi_momenta(chain), params)
    return 2.0 * math.pi * float(np.sum(sin_t**2)) / chain.n_sites


def ge_per_site_finite(chain: ChainSpec, params: ModelParams,
                       convention: str = SELECTED_CONVENTION) -> FiniteGERecord:
    xi_max, log_lam = optimize_xi_finite(chain, params)
    log_lam = min(log_lam, 0.0)
    n = chain.n_sites
    eps = -2.0 * log_lam / (n * LN2)
    return FiniteGERecord(n_sites=n, params=params, lambda_max=math.exp(log_lam), xi_max=xi_max,
                          epsilon_n=eps + 0.0, beta_g_n=gp_per_site_finite(chain, params),
                          beta_p_n=beta_p_from_xi(xi_max, convention))


def complex_ge_finite(chain: ChainSpec, params: ModelParams,
                      convention: str = SELECTED_CONVENTION) -> complex:
    """epsilon_N - i (beta_N^g - beta_N^p) / ln 2."""
    return ge_per_site_finite(chain, params, convention).complex_ge_n
