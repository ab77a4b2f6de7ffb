"""Oracle-equivalence checks shared by ``xyge verify`` and the acceptance tests."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import oracle
from .analysis import convention_probe
from .finite import ModeProduct, gp_per_site_finite, optimize_xi_finite
from .model import ChainSpec, ModelParams
from .thermo import SELECTED_CONVENTION, beta_p_from_xi

R_GRID = (0.0, 0.25, 0.5, 0.75, 1.0)
H_GRID = (0.3, 0.7, 1.0, 1.4, 1.8)


@dataclass
class Check:
    name: str
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.residual < self.tolerance)

    def as_dict(self) -> dict:
        out = asdict(self)
        out["passed"] = self.passed
        return out


def overlap_residuals(n_sites: int, r_grid=R_GRID, h_grid=H_GRID, loop_steps: int = 1024):
    """Worst |Lambda_formula - |<Phi|psi>|| and worst |e^{i N beta_g} - e^{i phase_oracle}| on the grid."""
    chain = ChainSpec(n_sites)
    worst_overlap, worst_phase = 0.0, 0.0
    for r in r_grid:
        for h in h_grid:
            params = ModelParams(r, h)
            psi = oracle.even_ground_state(chain, params)
            prod = ModeProduct(chain, params)
            xi_max, _ = optimize_xi_finite(chain, params)
            for xi in (0.0, 0.3, xi_max):
                formula = math.exp(prod.log_lambda(xi))
                exact = abs(oracle.overlap_with_product(psi, xi))
                worst_overlap = max(worst_overlap, abs(formula - exact))
            phase = oracle.pancharatnam_phase(psi, oracle.LoopSpec(math.pi, loop_steps))
            total = n_sites * gp_per_site_finite(chain, params)
            worst_phase = max(worst_phase, abs(np.exp(1j * total) - np.exp(1j * phase)))
    return worst_overlap, worst_phase


def interferometer_residuals(n_sites: int = 8, r: float = 1.0, h_values=(0.8, 1.2)):
    """Fringe read-out against Lambda_max^2 and arg A, and arg A against the mode formulas."""
    chain = ChainSpec(n_sites)
    worst_vis, worst_phase, worst_cross = 0.0, 0.0, 0.0
    for h in h_values:
        params = ModelParams(r, h)
        psi = oracle.even_ground_state(chain, params)
        lam, xi_max = oracle.exact_entanglement_eigenvalue(psi)
        amp = oracle.interference_amplitude(chain, params, xi_max, psi=psi)
        rec = oracle.fringe_readout(amp, lam**2)
        worst_vis = max(worst_vis, abs(rec.extracted_visibility - lam**2))
        worst_phase = max(worst_phase, abs(oracle.wrap_phase(rec.extracted_phase - np.angle(amp))))
        xi_f, _ = optimize_xi_finite(chain, params)
        delta = n_sites * (gp_per_site_finite(chain, params) - beta_p_from_xi(xi_f, "pi"))
        worst_cross = max(worst_cross, abs(np.exp(1j * delta) - amp / abs(amp)))
    return worst_vis, worst_phase, worst_cross


def qgt_residuals(n_sites: int = 8, r: float = 0.5, h: float = 1.5):
    chain = ChainSpec(n_sites)
    params = ModelParams(r, h)
    sos = oracle.qgt(chain, params, "sum-over-states")
    proj = oracle.qgt(chain, params, "projector-derivative", delta=1e-4)
    methods = float(np.max(np.abs(sos.t - proj.t)))
    curv = oracle.berry_curvature_plaquette(chain, params, delta=1e-3)
    curvature = abs(curv - sos.curvature_part[0, 1])
    d = np.array([1e-3, 1e-3])
    fid = oracle.fidelity(chain, params, params.shifted(*d))
    quad = 0.5 * d @ sos.metric_part @ d
    return methods, curvature, abs((1 - fid) - quad)


def run_checks(n_list=(4, 6, 8, 10), bound: float | None = None, loop_steps: int = 1024) -> dict:
    """All checks with their residuals; ``bound`` overrides every tolerance."""

    def tol(x):
        return x if bound is None else bound

    checks = []
    for n in n_list:
        ov, ph = overlap_residuals(n, loop_steps=loop_steps)
        checks.append(Check(f"lambda_finite_vs_overlap_N{n}", ov, tol(1e-8)))
        checks.append(Check(f"gp_finite_vs_pancharatnam_N{n}", ph, tol(1e-6)))
    vis, phase, cross = interferometer_residuals()
    checks.append(Check("fringe_visibility_vs_lambda_sq", vis, tol(1e-6)))
    checks.append(Check("fringe_phase_vs_arg_A", phase, tol(1e-6)))
    checks.append(Check("arg_A_vs_mode_formulas", cross, tol(1e-6)))
    methods, curvature, fid = qgt_residuals()
    checks.append(Check("qgt_sum_over_states_vs_projector", methods, tol(1e-6)))
    checks.append(Check("plaquette_curvature_vs_qgt", curvature, tol(1e-4)))
    checks.append(Check("fidelity_vs_metric_quadratic_form", fid, tol(1e-6)))
    probe = convention_probe()
    probe_residual = probe.residuals.get(probe.selected, math.inf) if probe.selected else math.inf
    checks.append(Check("convention_probe_xx_identity", probe_residual, tol(probe.tolerance)))
    return {
        "checks": [c.as_dict() for c in checks],
        "convention_probe": {"selected": probe.selected, "residuals": probe.residuals,
                             "per_size": {str(k): v for k, v in probe.per_size.items()},
                             "applied": SELECTED_CONVENTION},
        "passed": all(c.passed for c in checks),
    }
