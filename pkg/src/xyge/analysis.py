"""Curves over the field h, derivative features, finite-size scans and consistency probes."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import oracle
from .finite import ge_per_site_finite
from .model import ChainSpec, ModelParams
from .optimize import maximize_unimodal  # noqa: F401  (re-exported)
from .thermo import (BETA_P_CONVENTIONS, LN2, SELECTED_CONVENTION, TOL_OPT, TOL_QUAD,
                     geometric_record, gp_delta)

XI_ZERO_THRESHOLD = 1e-6
JUMP_FACTOR = 10.0
MODES = ("thermo", "finite", "exact")


# --- single parameter points ------------------------------------------------------------------


@dataclass(frozen=True)
class ResultRow:
    mode: str
    n_sites: int | None
    r: float
    h: float
    epsilon: float
    xi_max: float
    beta_g: float
    beta_p: float
    delta_beta: float

    @property
    def re_eps_c(self) -> float:
        return self.epsilon

    @property
    def im_eps_c(self) -> float:
        return -self.delta_beta / LN2


def _exact_row(n_sites: int, params: ModelParams, convention: str, loop_steps: int) -> ResultRow:
    chain = ChainSpec(n_sites)
    psi = oracle.even_ground_state(chain, params)
    lam, xi_max = oracle.exact_entanglement_eigenvalue(psi)
    extent = BETA_P_CONVENTIONS[convention]
    beta_g = oracle.lifted_phase(psi, oracle.LoopSpec(math.pi, loop_steps)) / n_sites
    phi = oracle.product_state(n_sites, xi_max)
    beta_p = oracle.lifted_phase(phi, oracle.LoopSpec(extent, loop_steps)) / n_sites
    eps = -2.0 * math.log2(lam) / n_sites if lam < 1.0 else 0.0
    return ResultRow("exact", n_sites, params.r, params.h, eps, xi_max, beta_g, beta_p, beta_g - beta_p)


def evaluate_point(mode: str, params: ModelParams, n_sites: int | None = None,
                   convention: str = SELECTED_CONVENTION, tol_quad: float = TOL_QUAD,
                   tol_opt: float = TOL_OPT, loop_steps: int = 1024) -> ResultRow:
    """All densities at one point in the requested mode."""
    if mode == "thermo":
        rec = geometric_record(params, convention, tol_quad, tol_opt)
        return ResultRow("thermo", None, params.r, params.h, rec.epsilon, rec.xi_max,
                         rec.beta_g, rec.beta_p, rec.delta_beta)
    if n_sites is None:
        raise ValueError(f"mode {mode!r} needs a chain length")
    if mode == "finite":
        rec = ge_per_site_finite(ChainSpec(n_sites), params, convention)
        return ResultRow("finite", n_sites, params.r, params.h, rec.epsilon_n, rec.xi_max,
                         rec.beta_g_n, rec.beta_p_n, rec.delta_beta_n)
    if mode == "exact":
        return _exact_row(n_sites, params, convention, loop_steps)
    raise ValueError(f"unknown mode {mode!r}")


# --- curves -----------------------------------------------------------------------------------


@dataclass(frozen=True)
class CurveSamples:
    abscissae: np.ndarray
    ordinates: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        x = np.asarray(self.abscissae, dtype=float)
        y = np.asarray(self.ordinates, dtype=float)
        if x.shape != y.shape or x.ndim != 1:
            raise ValueError("abscissae and ordinates must be 1-D of equal length")
        if len(x) > 1 and np.any(np.diff(x) <= 0):
            raise ValueError("abscissae must be strictly ascending")
        object.__setattr__(self, "abscissae", x)
        object.__setattr__(self, "ordinates", y)


def sweep_curve(quantity: str, r: float, h_grid, mode: str = "thermo",
                n_sites: int | None = None) -> CurveSamples:
    rows = [evaluate_point(mode, ModelParams(r, h), n_sites) for h in h_grid]
    return CurveSamples(np.asarray(h_grid, dtype=float), np.array([getattr(x, quantity) for x in rows]),
                        {"quantity": quantity, "r": r, "mode": mode, "N": n_sites})


def _three_point_weights(x0, x1, x2, at):
    """Weights of f(x0), f(x1), f(x2) in the derivative of their interpolating parabola at ``at``."""
    w0 = (2 * at - x1 - x2) / ((x0 - x1) * (x0 - x2))
    w1 = (2 * at - x0 - x2) / ((x1 - x0) * (x1 - x2))
    w2 = (2 * at - x0 - x1) / ((x2 - x0) * (x2 - x1))
    return w0, w1, w2


def derivative_curve(samples: CurveSamples) -> CurveSamples:
    """Second-order finite differences: central inside, one-sided at both ends."""
    x, y = samples.abscissae, samples.ordinates
    if len(x) < 3:
        raise ValueError("derivative needs at least three samples")
    out = np.empty_like(y)
    x0, x1, x2 = x[:-2], x[1:-1], x[2:]
    w0, w1, w2 = _three_point_weights(x0, x1, x2, x1)
    out[1:-1] = w0 * y[:-2] + w1 * y[1:-1] + w2 * y[2:]
    w = _three_point_weights(x[0], x[1], x[2], x[0])
    out[0] = w[0] * y[0] + w[1] * y[1] + w[2] * y[2]
    w = _three_point_weights(x[-3], x[-2], x[-1], x[-1])
    out[-1] = w[0] * y[-3] + w[1] * y[-2] + w[2] * y[-1]
    meta = dict(samples.meta)
    meta["derivative_order"] = meta.get("derivative_order", 0) + 1
    return CurveSamples(x, out, meta)


def jump_ratio(values: np.ndarray, index: int, halo: int = 2, window: int = 12) -> float:
    """Largest step |v[i+1] - v[i]| within ``halo`` of ``index`` over the median step nearby."""
    steps = np.abs(np.diff(values))
    lo, hi = max(index - halo - 1, 0), min(index + halo + 1, len(steps))
    local = steps[lo:hi].max() if hi > lo else 0.0
    around = np.concatenate([steps[max(lo - window, 0):lo], steps[hi:hi + window]])
    if len(around) == 0:
        return math.inf if local > 0 else 0.0
    median = float(np.median(around))
    return math.inf if median == 0 else float(local / median)


# --- critical features ------------------------------------------------------------------------


@dataclass
class CriticalReport:
    h_peak: float | None
    peak_value: float | None
    h_s_estimate: float | None
    cusp_flag: bool
    cusp_ratio: float | None = None


def h_s_index(h_grid, xi_max) -> int | None:
    """First grid index from which xi_max stays below the threshold to the end of the grid."""
    below = np.asarray(xi_max) < XI_ZERO_THRESHOLD
    if not below[-1]:
        return None
    k = len(below) - 1
    while k > 0 and below[k - 1]:
        k -= 1
    return k


def critical_report(h_grid, epsilon, xi_max) -> CriticalReport:
    h_grid = np.asarray(h_grid, dtype=float)
    deriv = derivative_curve(CurveSamples(h_grid, np.asarray(epsilon))).ordinates
    k = int(np.argmax(np.abs(deriv)))
    ks = h_s_index(h_grid, xi_max)
    cusp, ratio = False, None
    if ks is not None and 0 < ks < len(h_grid) - 1:
        second = derivative_curve(derivative_curve(CurveSamples(h_grid, np.asarray(epsilon)))).ordinates
        ratio = jump_ratio(second, ks)
        cusp = ratio > JUMP_FACTOR
    return CriticalReport(h_peak=float(h_grid[k]), peak_value=float(deriv[k]),
                          h_s_estimate=None if ks is None else float(h_grid[ks]),
                          cusp_flag=cusp, cusp_ratio=ratio)


def detect_critical_features(r: float, mode: str = "thermo", h_grid=None,
                             n_sites: int | None = None) -> CriticalReport:
    """Peak of |d epsilon / dh| and the field h_s beyond which xi_max vanishes."""
    if h_grid is None:
        h_grid = np.round(np.linspace(0.2, 2.0, 361), 12)
    rows = [evaluate_point(mode, ModelParams(r, h), n_sites) for h in h_grid]
    return critical_report(h_grid, [x.epsilon for x in rows], [x.xi_max for x in rows])


def refine_h_s(r: float, lo: float, hi: float, tol: float = 1e-9) -> float:
    """Bisect for the smallest h with xi_max below threshold, given xi_max(lo) > it >= xi_max(hi)."""
    from .thermo import optimize_xi

    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if optimize_xi(ModelParams(r, mid))[0] < XI_ZERO_THRESHOLD:
            hi = mid
        else:
            lo = mid
    return hi


@dataclass
class CuspStructure:
    r: float
    h_s_coarse: float | None
    h_s: float | None
    local_step: float | None
    beta_g_ratio: float | None  # jump of the discrete second derivative of beta_g
    delta_beta_ratio: float | None  # jump of the discrete first derivative of delta_beta
    epsilon_ratio: float | None  # jump of the discrete second derivative of epsilon

    @property
    def beta_g_smooth(self) -> bool:
        return self.beta_g_ratio is not None and self.beta_g_ratio <= JUMP_FACTOR

    @property
    def delta_beta_kink(self) -> bool:
        return self.delta_beta_ratio is not None and self.delta_beta_ratio > JUMP_FACTOR


def cusp_structure(r: float, h_grid=None, half_width: int = 20) -> CuspStructure:
    """Locate h_s on ``h_grid`` (thermo), refine it, and measure derivative jumps on a local grid.

    The local grid has step (h_s - 1) / 20, capped at 1e-3, so that the
    critical point stays at the edge of the window for small r.
    """
    if h_grid is None:
        h_grid = np.round(np.linspace(0.2, 2.0, 361), 12)
    h_grid = np.asarray(h_grid, dtype=float)
    rows = [evaluate_point("thermo", ModelParams(r, h)) for h in h_grid]
    ks = h_s_index(h_grid, [x.xi_max for x in rows])
    if ks is None or ks == 0:
        return CuspStructure(r, None, None, None, None, None, None)
    h_s = refine_h_s(r, float(h_grid[ks - 1]), float(h_grid[ks]))
    step = min(1e-3, max(h_s - 1.0, 1e-6) / 20.0)
    local = np.round(h_s + step * (np.arange(-half_width, half_width + 1) + 0.5), 12)
    local_rows = [evaluate_point("thermo", ModelParams(r, h)) for h in local]
    k_local = h_s_index(local, [x.xi_max for x in local_rows])

    def curve(name):
        return CurveSamples(local, np.array([getattr(x, name) for x in local_rows]))

    second_bg = derivative_curve(derivative_curve(curve("beta_g"))).ordinates
    first_db = derivative_curve(curve("delta_beta")).ordinates
    second_eps = derivative_curve(derivative_curve(curve("epsilon"))).ordinates
    return CuspStructure(r, float(h_grid[ks]), h_s, step, jump_ratio(second_bg, k_local),
                         jump_ratio(first_db, k_local), jump_ratio(second_eps, k_local))


# --- finite-size scan -------------------------------------------------------------------------


@dataclass
class ScalingTable:
    n_sites: list
    h_peak: list
    peak_value: list
    slope: float
    intercept: float


def finite_size_scan(r: float, n_list, h_grid) -> ScalingTable:
    """Per-N location and height of the maximum of d epsilon_N / dh, and the fit peak ~ a ln N + b.

    The signed maximum is the critical peak; for small N the negative dip at the
    h_s cusp can be larger in magnitude and would otherwise be picked up.
    """
    h_grid = np.asarray(h_grid, dtype=float)
    peaks, heights = [], []
    for n in n_list:
        if n % 2 or n < 8:
            raise ValueError(f"scan uses even N >= 8, got {n}")
        eps = [ge_per_site_finite(ChainSpec(n), ModelParams(r, h)).epsilon_n for h in h_grid]
        d = derivative_curve(CurveSamples(h_grid, np.array(eps))).ordinates
        k = int(np.argmax(d))
        peaks.append(float(h_grid[k]))
        heights.append(float(d[k]))
    if len(n_list) >= 2:
        slope, intercept = np.polyfit(np.log(np.asarray(n_list, dtype=float)), heights, 1)
    else:
        slope, intercept = math.nan, math.nan
    return ScalingTable(list(n_list), peaks, heights, float(slope), float(intercept))


# --- XX limit ---------------------------------------------------------------------------------


@dataclass
class XXProbeRow:
    r: float
    h_at_max: float
    max_abs_derivative: float


def delta_beta_curve(r: float, h_grid, convention: str = SELECTED_CONVENTION) -> CurveSamples:
    values = [gp_delta(ModelParams(r, h), convention,
                       xi_max=geometric_record(ModelParams(r, h), convention).xi_max).delta_beta
              for h in h_grid]
    return CurveSamples(np.asarray(h_grid, dtype=float), np.array(values),
                        {"quantity": "delta_beta", "r": r, "mode": "thermo"})


def xx_singularity_probe(r_sequence, h_eval, convention: str = SELECTED_CONVENTION) -> list[XXProbeRow]:
    """max_h |d delta_beta / dh| on ``h_eval`` for each r in the sequence, plus r = 0."""
    rows = []
    for r in list(r_sequence) + [0.0]:
        d = derivative_curve(delta_beta_curve(r, h_eval, convention))
        k = int(np.argmax(np.abs(d.ordinates)))
        rows.append(XXProbeRow(float(r), float(d.abscissae[k]), float(abs(d.ordinates[k]))))
    return rows


# --- geometric checks -------------------------------------------------------------------------


def fubini_study_check(lambda_max: float) -> tuple[float, float]:
    """(arccos Lambda, 1 - d^2 / 2): geodesic distance to the closest product ray and its quadratic form."""
    if not 0.0 < lambda_max <= 1.0:
        raise ValueError(f"Lambda must lie in (0, 1], got {lambda_max}")
    d = math.acos(min(lambda_max, 1.0))
    return d, 1.0 - 0.5 * d * d


@dataclass
class ConventionProbe:
    selected: str | None
    residuals: dict  # convention -> max |beta_g - beta_p| over the grid
    per_size: dict  # N -> convention selected at that size alone
    tolerance: float = 1e-6


def convention_probe(chain_sizes=(6, 8, 10), h_grid=(0.45, 0.5, 0.6, 0.8), tol: float = 1e-6,
                     loop_steps: int = 1024) -> ConventionProbe:
    """Which per-site product-state phase makes delta_beta(0, h) vanish on the exact oracle.

    The ground-state loop is phi in [0, pi]; the product state is rotated over
    phi in [0, pi] ("pi") or [0, 2 pi] ("2pi"). Phases are the real-valued
    lifts from ``oracle.lifted_phase``. Fields that half-fill the chain put
    xi_max at pi/2, where the rotated product state ends orthogonal to its
    start and its phase is undefined; keep the grid away from those.
    """
    residuals = {c: 0.0 for c in BETA_P_CONVENTIONS}
    per_size = {}
    for n in chain_sizes:
        if n % 2 or n > 10:
            raise ValueError(f"probe uses even N <= 10, got {n}")
        local = {c: 0.0 for c in BETA_P_CONVENTIONS}
        for h in h_grid:
            if not 0.0 < h < 1.0:
                raise ValueError("probe grid must lie inside (0, 1)")
            psi = oracle.even_ground_state(ChainSpec(n), ModelParams(0.0, h))
            _, xi_max = oracle.exact_entanglement_eigenvalue(psi)
            beta_g = oracle.lifted_phase(psi, oracle.LoopSpec(math.pi, loop_steps)) / n
            phi = oracle.product_state(n, xi_max)
            for conv, extent in BETA_P_CONVENTIONS.items():
                beta_p = oracle.lifted_phase(phi, oracle.LoopSpec(extent, loop_steps)) / n
                local[conv] = max(local[conv], abs(beta_g - beta_p))
        for conv in residuals:
            residuals[conv] = max(residuals[conv], local[conv])
        passing = [c for c, v in local.items() if v < tol]
        per_size[n] = passing[0] if len(passing) == 1 else None
    passing = [c for c, v in residuals.items() if v < tol]
    selected = passing[0] if len(passing) == 1 else None
    return ConventionProbe(selected=selected, residuals=residuals, per_size=per_size, tolerance=tol)
