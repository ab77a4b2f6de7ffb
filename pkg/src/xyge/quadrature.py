"""Adaptive Gauss-Legendre quadrature on [0, 1/2] with meshes graded toward both ends.

The momentum integrals carry integrable logarithmic endpoint singularities
(ln cot pi mu at mu -> 0, ln sin^2 at mu -> 1/2 when xi = pi). Geometric
grading with ratio 1/2 makes every interval see a smooth integrand on its own
length scale; intervals are then bisected until a 20-point and a 12-point rule
agree. A mesh can be adapted to several integrands at once and then reused,
which is what the xi optimisation relies on.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

HIGH_ORDER = 20
LOW_ORDER = 12
GRADING_LEVELS = 44
MAX_INTERVALS = 4000


class QuadratureError(RuntimeError):
    def __init__(self, message: str, error_estimate: float):
        super().__init__(f"{message} (achieved error estimate {error_estimate:.3e})")
        self.error_estimate = error_estimate


@lru_cache(maxsize=None)
def _rule(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def graded_breakpoints(levels: int = GRADING_LEVELS, interior: Sequence[float] = ()) -> np.ndarray:
    """0, 1/2 and geometric points 2^-k / 2 and 1/2 - 2^-k / 2, plus ``interior`` points."""
    k = np.arange(1, levels + 1)
    left = 0.5 * 0.5**k
    right = 0.5 - left
    pts = np.concatenate([[0.0, 0.5], left, right, np.asarray(interior, dtype=float)])
    pts = pts[(pts >= 0.0) & (pts <= 0.5)]
    return np.unique(pts)


@dataclass
class Mesh:
    """Fixed set of intervals with the node/weight arrays of both rules."""

    edges_lo: np.ndarray
    edges_hi: np.ndarray

    def __post_init__(self):
        self.nodes, self.weights, self.index = self._expand(HIGH_ORDER)
        self.nodes_lo, self.weights_lo, self.index_lo = self._expand(LOW_ORDER)

    def _expand(self, n: int):
        x, w = _rule(n)
        half = 0.5 * (self.edges_hi - self.edges_lo)
        mid = 0.5 * (self.edges_hi + self.edges_lo)
        nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
        weights = (half[:, None] * w[None, :]).ravel()
        index = np.repeat(np.arange(len(mid)), n)
        return nodes, weights, index

    @property
    def n_intervals(self) -> int:
        return len(self.edges_lo)

    def interval_errors(self, values_hi: np.ndarray, values_lo: np.ndarray) -> np.ndarray:
        """Per-interval |I_high - I_low| for one or several integrands (last axis = nodes)."""
        values_hi = np.atleast_2d(values_hi)
        values_lo = np.atleast_2d(values_lo)
        m = self.n_intervals
        hi = np.zeros((len(values_hi), m))
        lo = np.zeros((len(values_lo), m))
        for row in range(len(values_hi)):
            hi[row] = np.bincount(self.index, values_hi[row] * self.weights, minlength=m)
            lo[row] = np.bincount(self.index_lo, values_lo[row] * self.weights_lo, minlength=m)
        with np.errstate(invalid="ignore"):
            err = np.abs(hi - lo)
        # a -inf integrand on an interval (sentinel) must not trigger refinement forever
        return np.where(np.isfinite(err), err, 0.0)

    def integrate(self, func: Callable[[np.ndarray], np.ndarray]) -> tuple[float, float]:
        """(integral, error estimate) of ``func`` on this mesh."""
        vh = func(self.nodes)
        vl = func(self.nodes_lo)
        value = float(np.dot(self.weights, vh))
        err = float(self.interval_errors(vh, vl).sum())
        return value, err

    def bisect(self, mask: np.ndarray) -> "Mesh":
        lo, hi = self.edges_lo, self.edges_hi
        mid = 0.5 * (lo + hi)
        new_lo = np.concatenate([lo[~mask], lo[mask], mid[mask]])
        new_hi = np.concatenate([hi[~mask], mid[mask], hi[mask]])
        order = np.argsort(new_lo)
        return Mesh(new_lo[order], new_hi[order])


def adapt_mesh(funcs: Callable[[np.ndarray], np.ndarray], breakpoints: np.ndarray,
               tol: float, max_intervals: int = MAX_INTERVALS) -> Mesh:
    """Bisect intervals until the summed error estimate of every integrand is below ``tol``.

    ``funcs`` maps a node array to an array of shape (n_integrands, n_nodes).
    """
    mesh = Mesh(breakpoints[:-1].copy(), breakpoints[1:].copy())
    while True:
        err = mesh.interval_errors(funcs(mesh.nodes), funcs(mesh.nodes_lo))
        total = err.sum(axis=1)
        if np.all(total <= tol):
            return mesh
        if mesh.n_intervals >= max_intervals:
            raise QuadratureError("mesh refinement limit reached", float(total.max()))
        # refine intervals carrying more than their share of the budget for any integrand
        share = tol / mesh.n_intervals
        mask = np.any(err > 0.5 * share, axis=0)
        if not mask.any():
            mask = np.any(err >= err.max(axis=1, keepdims=True), axis=0)
        mesh = mesh.bisect(mask)


def integrate(func: Callable[[np.ndarray], np.ndarray], breakpoints: np.ndarray,
              tol: float = 1e-10) -> tuple[float, float]:
    """Adaptive integral of a scalar integrand over the span of ``breakpoints``."""
    mesh = adapt_mesh(lambda x: np.atleast_2d(func(x)), breakpoints, tol)
    return mesh.integrate(func)
