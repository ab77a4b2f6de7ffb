"""Parameters of the periodic transverse-field XY chain and its Bogoliubov angles.

The chain Hamiltonian is

    H(r, h) = -sum_j [ (1+r)/2 X_j X_{j+1} + (1-r)/2 Y_j Y_{j+1} + h Z_j ]

and every ground-state quantity in this package is a functional of the mixing
angle theta(mu), defined through tan 2 theta = r sin 2 pi mu / (h - cos 2 pi mu)
with 2 theta taken in [0, pi].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class IndeterminateAngle(ValueError):
    """Raised when both arctangent arguments vanish (r = 0 and h = cos 2 pi mu)."""


@dataclass(frozen=True)
class ModelParams:
    r: float
    h: float

    def __post_init__(self):
        if not (math.isfinite(self.r) and math.isfinite(self.h)):
            raise ValueError(f"parameters must be finite, got r={self.r}, h={self.h}")
        if not 0.0 <= self.r <= 1.0:
            raise ValueError(f"anisotropy r must lie in [0, 1], got {self.r}")
        if self.h < 0.0:
            raise ValueError(f"field h must be non-negative, got {self.h}")

    def shifted(self, dr: float = 0.0, dh: float = 0.0) -> "ModelParams":
        return ModelParams(self.r + dr, self.h + dh)


@dataclass(frozen=True)
class ChainSpec:
    n_sites: int

    def __post_init__(self):
        if int(self.n_sites) != self.n_sites or self.n_sites < 4:
            raise ValueError(f"chain needs an integer N >= 4, got {self.n_sites}")

    @property
    def is_even(self) -> bool:
        return self.n_sites % 2 == 0

    @property
    def n_modes(self) -> int:
        # integers m with m < (N - 1) / 2
        return self.n_sites // 2

    def require_even(self):
        if not self.is_even:
            raise ValueError(
                f"mode-product formulas need an even chain length, got N={self.n_sites}; "
                "use the exact oracle for odd N"
            )


@dataclass(frozen=True)
class ModeAngles:
    angles: np.ndarray
    quasi_momenta: np.ndarray
    indeterminate: np.ndarray

    def __len__(self):
        return len(self.angles)


def _field_offset(mu, h):
    """h - cos 2 pi mu, written as (h - 1) + 2 sin^2 pi mu so it stays exact near h = 1, mu -> 0."""
    return (h - 1.0) + 2.0 * np.sin(np.pi * mu) ** 2


def _theta(mu, r, h):
    y = r * np.sin(2.0 * np.pi * mu)
    x = _field_offset(mu, h)
    # arctan2 with y >= 0 already lands in [0, pi]; clip guards the -0.0 corner
    two_theta = np.clip(np.arctan2(y, x), 0.0, np.pi)
    return 0.5 * two_theta, (y == 0.0) & (x == 0.0)


def theta_continuum(mu: float, params: ModelParams) -> float:
    """Bogoliubov angle at quasi-momentum ``mu`` in (0, 1/2].

    Raises ``IndeterminateAngle`` on the measure-zero locus r = 0, h = cos 2 pi mu.
    """
    if not 0.0 < mu <= 0.5:
        raise ValueError(f"quasi-momentum must lie in (0, 1/2], got {mu}")
    theta, bad = _theta(mu, params.r, params.h)
    if bad:
        raise IndeterminateAngle(f"theta undefined at mu={mu}, r={params.r}, h={params.h}")
    return float(theta)


def theta_array(mu: np.ndarray, params: ModelParams) -> np.ndarray:
    """Vectorised ``theta_continuum`` without domain checks; indeterminate points give pi/4."""
    theta, _ = _theta(np.asarray(mu, dtype=float), params.r, params.h)
    return theta


def half_angle_cos_sin(mu, params: ModelParams):
    """(cos theta, sin theta) at ``mu`` without cancellation near theta = 0 or pi/2.

    Uses cos^2 theta = (rho + x) / (2 rho) and sin^2 theta = (rho - x) / (2 rho)
    with x = h - cos 2 pi mu, y = r sin 2 pi mu, rho = |(x, y)|, rewriting the
    difference that cancels as y^2 / (rho -/+ x). Indeterminate points give
    (sqrt(1/2), sqrt(1/2)).
    """
    mu = np.asarray(mu, dtype=float)
    y = params.r * np.sin(2.0 * np.pi * mu)
    x = _field_offset(mu, params.h)
    rho = np.hypot(x, y)
    with np.errstate(invalid="ignore", divide="ignore"):
        big = rho + np.abs(x)
        small = np.where(big > 0, y * y / big, 0.0)
        plus = np.where(x >= 0, big, small)  # rho + x
        minus = np.where(x >= 0, small, big)  # rho - x
        cos2 = np.where(rho > 0, plus / (2 * rho), 0.5)
        sin2 = np.where(rho > 0, minus / (2 * rho), 0.5)
    return np.sqrt(cos2), np.sqrt(sin2)


def log_half_angle_cos_sin(mu, params: ModelParams):
    """(ln cos theta, ln sin theta) from the same half-angle identities, kept in log form.

    The small member is y^2 / (rho + |x|) / (2 rho); taking logs before squaring
    keeps it accurate when y^2 would underflow. Exact zeros map to -inf.
    """
    mu = np.asarray(mu, dtype=float)
    y = params.r * np.sin(2.0 * np.pi * mu)
    x = _field_offset(mu, params.h)
    rho = np.hypot(x, y)
    with np.errstate(invalid="ignore", divide="ignore"):
        log_2rho = np.log(2.0 * rho)
        log_big = np.log(rho + np.abs(x))
        log_small = 2.0 * np.log(np.abs(y)) - log_big
        log_plus = np.where(x >= 0, log_big, log_small) - log_2rho
        log_minus = np.where(x >= 0, log_small, log_big) - log_2rho
        half = 0.5 * math.log(0.5)
        return (np.where(rho > 0, 0.5 * log_plus, half),
                np.where(rho > 0, 0.5 * log_minus, half))


def quasi_momenta(chain: ChainSpec) -> np.ndarray:
    m = np.arange(chain.n_modes)
    return (2 * m + 1) / (2.0 * chain.n_sites)


def theta_modes(chain: ChainSpec, params: ModelParams, strict: bool = False) -> ModeAngles:
    """Angles theta_m at mu_m = (2m+1)/(2N) for m < (N-1)/2.

    With ``strict`` an indeterminate mode raises; otherwise it is flagged in
    ``ModeAngles.indeterminate`` and carries the placeholder pi/4.
    """
    mu = quasi_momenta(chain)
    theta, bad = _theta(mu, params.r, params.h)
    if strict and bad.any():
        raise IndeterminateAngle(
            f"modes {np.flatnonzero(bad).tolist()} are indeterminate at r={params.r}, h={params.h}"
        )
    return ModeAngles(angles=theta, quasi_momenta=mu, indeterminate=bad)
