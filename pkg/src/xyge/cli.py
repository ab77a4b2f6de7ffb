"""Command-line front end: ``xyge {sweep,verify,qgt,fringes,scaling,critical}``.

Configuration comes from built-in defaults, then an optional ``--config`` file
of ``key = value`` lines, then command-line flags (highest precedence).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace

import numpy as np
from threadpoolctl import threadpool_limits

from . import oracle
from .analysis import (MODES, CurveSamples, ResultRow, critical_report, cusp_structure,
                       derivative_curve, evaluate_point, finite_size_scan)
from .model import ChainSpec, IndeterminateAngle, ModelParams
from .quadrature import QuadratureError
from .thermo import BETA_P_CONVENTIONS, SELECTED_CONVENTION, TOL_OPT, TOL_QUAD

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL, EXIT_VERIFY = 0, 1, 2, 3
HEADER = ["mode", "N", "r", "h", "epsilon", "xi_max", "beta_g", "beta_p", "delta_beta",
          "re_eps_c", "im_eps_c"]
DERIVATIVE_COLUMNS = ["d_epsilon_dh", "d_beta_g_dh", "d_delta_beta_dh"]
COMMANDS = ("sweep", "verify", "qgt", "fringes", "scaling", "critical")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str = "sweep"
    r: float = 1.0
    r_list: list = field(default_factory=list)  # overrides r when non-empty
    h_min: float = 0.2
    h_max: float = 2.0
    h_steps: int = 361
    N: int = 8
    N_list: list = field(default_factory=list)
    mode: str = "thermo"
    derivative: bool = False
    out: str | None = None  # stdout when unset
    plot: str | None = None
    threads: int = 1
    tol_quad: float = TOL_QUAD
    tol_opt: float = TOL_OPT
    loop_extent: str = SELECTED_CONVENTION
    loop_steps: int = 1024
    residual_bound: float | None = None  # verify only: replaces every tolerance

    def validate(self) -> "RunConfig":
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        for r in self.r_values:
            if not (math.isfinite(r) and 0.0 <= r <= 1.0):
                raise ConfigError(f"r must lie in [0, 1], got {r}")
        if not (math.isfinite(self.h_min) and math.isfinite(self.h_max)) or self.h_min < 0:
            raise ConfigError("h range must be finite and non-negative")
        if self.h_max < self.h_min:
            raise ConfigError("h-max must not be below h-min")
        if self.h_steps < 3:
            raise ConfigError("h-steps must be at least 3")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}")
        if self.threads < 1:
            raise ConfigError("threads must be positive")
        if self.loop_extent not in BETA_P_CONVENTIONS:
            raise ConfigError(f"loop-extent must be one of {tuple(BETA_P_CONVENTIONS)}")
        if self.loop_steps < 64:
            raise ConfigError("loop-steps must be at least 64")
        if self.tol_quad <= 0 or self.tol_opt <= 0:
            raise ConfigError("tolerances must be positive")
        for n in self.n_values:
            if n < 4:
                raise ConfigError(f"chain length must be >= 4, got {n}")
            if self.mode == "finite" and n % 2:
                raise ConfigError(f"finite mode needs even N, got {n}")
            if self.mode == "exact" and n > oracle.MAX_SITES:
                raise ConfigError(f"exact mode supports N <= {oracle.MAX_SITES}, got {n}")
        return self

    @property
    def r_values(self) -> list:
        return list(self.r_list) if self.r_list else [self.r]

    @property
    def n_values(self) -> list:
        return list(self.N_list) if self.N_list else [self.N]

    @property
    def h_grid(self) -> np.ndarray:
        return np.round(np.linspace(self.h_min, self.h_max, self.h_steps), 12)


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def _parse_list(text: str, cast) -> list:
    return [cast(x) for x in text.replace(",", " ").split()]


_CASTS = {
    "r": float, "h_min": float, "h_max": float, "h_steps": int, "N": int, "mode": str,
    "derivative": _parse_bool, "out": str, "plot": str, "threads": int, "tol_quad": float,
    "tol_opt": float, "loop_extent": str, "loop_steps": int, "residual_bound": float,
    "r_list": lambda s: _parse_list(s, float), "N_list": lambda s: _parse_list(s, int),
}


def _normalize_key(key: str) -> str:
    key = key.strip().lstrip("-").replace("-", "_")
    return {"n": "N", "n_list": "N_list"}.get(key.lower(), key)


def read_config_file(path: str) -> dict:
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, value = (x.strip() for x in line.split("=", 1))
            key = _normalize_key(key)
            if key not in _CASTS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            try:
                values[key] = _CASTS[key](value)
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: {exc}") from None
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="xyge", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=COMMANDS)
    sup = argparse.SUPPRESS
    parser.add_argument("--config", default=None, help="key = value file (flags override it)")
    parser.add_argument("--r", type=float, default=sup, help="anisotropy (default 1)")
    parser.add_argument("--r-list", dest="r_list", type=lambda s: _parse_list(s, float), default=sup,
                        help="comma-separated anisotropies, overrides --r")
    parser.add_argument("--h-min", dest="h_min", type=float, default=sup, help="default 0.2")
    parser.add_argument("--h-max", dest="h_max", type=float, default=sup, help="default 2.0")
    parser.add_argument("--h-steps", dest="h_steps", type=int, default=sup, help="default 361")
    parser.add_argument("--N", dest="N", type=int, default=sup, help="chain length (default 8)")
    parser.add_argument("--N-list", dest="N_list", type=lambda s: _parse_list(s, int), default=sup,
                        help="comma-separated chain lengths, overrides --N")
    parser.add_argument("--mode", choices=MODES, default=sup, help="default thermo")
    parser.add_argument("--derivative", action="store_true", default=sup,
                        help="append d/dh columns to sweep output")
    parser.add_argument("--out", default=sup, help="output CSV (stdout if omitted)")
    parser.add_argument("--plot", default=sup, help="SVG line chart of the sweep")
    parser.add_argument("--threads", type=int, default=sup, help="worker processes (default 1)")
    parser.add_argument("--tol-quad", dest="tol_quad", type=float, default=sup)
    parser.add_argument("--tol-opt", dest="tol_opt", type=float, default=sup)
    parser.add_argument("--loop-extent", dest="loop_extent", choices=tuple(BETA_P_CONVENTIONS),
                        default=sup, help="product-state loop extent behind beta_p")
    parser.add_argument("--loop-steps", dest="loop_steps", type=int, default=sup)
    parser.add_argument("--residual-bound", dest="residual_bound", type=float, default=sup,
                        help="verify: use this bound for every check")
    return parser


def load_config(argv=None) -> RunConfig:
    args = vars(build_parser().parse_args(argv))
    command = args.pop("command")
    config_path = args.pop("config")
    values = read_config_file(config_path) if config_path else {}
    values.update(args)
    known = {f.name for f in fields(RunConfig)}
    return replace(RunConfig(command=command), **{k: v for k, v in values.items() if k in known}).validate()


# --- formatting -------------------------------------------------------------------------------


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    x = float(x)
    if x == 0.0:
        return "0"  # folds -0.0
    return format(x, ".12g")


def write_csv(rows, header, path: str | None):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(x) for x in row])
    text = buf.getvalue()
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def row_values(row: ResultRow) -> list:
    return [row.mode, row.n_sites, row.r, row.h, row.epsilon, row.xi_max, row.beta_g, row.beta_p,
            row.delta_beta, row.re_eps_c, row.im_eps_c]


def svg_line_chart(series: dict, xlabel: str, ylabel: str, width=640, height=420) -> str:
    """Minimal standalone SVG with one polyline per named series."""
    xs = np.concatenate([np.asarray(x) for x, _ in series.values()])
    ys = np.concatenate([np.asarray(y) for _, y in series.values()])
    finite = np.isfinite(ys)
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = (float(ys[finite].min()), float(ys[finite].max())) if finite.any() else (0.0, 1.0)
    if y1 == y0:
        y1 = y0 + 1.0
    if x1 == x0:
        x1 = x0 + 1.0
    ml, mr, mt, mb = 70, 20, 20, 50
    pw, ph = width - ml - mr, height - mt - mb

    def px(x):
        return ml + (x - x0) / (x1 - x0) * pw

    def py(y):
        return mt + (1 - (y - y0) / (y1 - y0)) * ph

    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
             f'font-family="sans-serif" font-size="12">',
             f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
             f'<text x="{ml + pw / 2}" y="{height - 12}" text-anchor="middle">{xlabel}</text>',
             f'<text x="16" y="{mt + ph / 2}" text-anchor="middle" '
             f'transform="rotate(-90 16 {mt + ph / 2})">{ylabel}</text>',
             f'<text x="{ml}" y="{height - 32}" text-anchor="middle">{x0:.3g}</text>',
             f'<text x="{ml + pw}" y="{height - 32}" text-anchor="middle">{x1:.3g}</text>',
             f'<text x="{ml - 4}" y="{mt + ph}" text-anchor="end">{y0:.3g}</text>',
             f'<text x="{ml - 4}" y="{mt + 10}" text-anchor="end">{y1:.3g}</text>']
    for i, (name, (x, y)) in enumerate(series.items()):
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x, y) if np.isfinite(b))
        color = colors[i % len(colors)]
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        parts.append(f'<text x="{ml + pw - 8}" y="{mt + 16 + 16 * i}" text-anchor="end" '
                     f'fill="{color}">{name}</text>')
    parts.append("</svg>\n")
    return "\n".join(parts)


# --- commands ---------------------------------------------------------------------------------


def _point_task(task):
    mode, r, h, n, conv, tol_quad, tol_opt, loop_steps = task
    with threadpool_limits(limits=1):
        return evaluate_point(mode, ModelParams(r, h), n, conv, tol_quad, tol_opt, loop_steps)


def _run_tasks(tasks, threads: int):
    if threads == 1:
        return [_point_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        # map preserves submission order whatever the completion order
        return list(pool.map(_point_task, tasks, chunksize=max(1, len(tasks) // (4 * threads))))


def cmd_sweep(cfg: RunConfig) -> int:
    h_grid = cfg.h_grid
    n_values = [None] if cfg.mode == "thermo" else cfg.n_values
    blocks = [(r, n) for r in cfg.r_values for n in n_values]
    tasks = [(cfg.mode, r, float(h), n, cfg.loop_extent, cfg.tol_quad, cfg.tol_opt, cfg.loop_steps)
             for r, n in blocks for h in h_grid]
    results = _run_tasks(tasks, cfg.threads)
    header = list(HEADER) + (DERIVATIVE_COLUMNS if cfg.derivative else [])
    out_rows, series = [], {}
    for b, (r, n) in enumerate(blocks):
        block = results[b * len(h_grid):(b + 1) * len(h_grid)]
        extra = []
        if cfg.derivative:
            extra = [derivative_curve(CurveSamples(h_grid, np.array([getattr(x, q) for x in block]))).ordinates
                     for q in ("epsilon", "beta_g", "delta_beta")]
        for i, row in enumerate(block):
            out_rows.append(row_values(row) + [col[i] for col in extra])
        label = f"r={fmt(r)}" + ("" if n is None else f", N={n}")
        series[label] = (h_grid, extra[0] if extra else np.array([x.epsilon for x in block]))
    write_csv(out_rows, header, cfg.out)
    if cfg.plot:
        ylabel = "d epsilon / dh" if cfg.derivative else "epsilon"
        with open(cfg.plot, "w", encoding="utf-8") as fh:
            fh.write(svg_line_chart(series, "h", ylabel))
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    from .verify import run_checks

    n_list = [n for n in cfg.n_values if n % 2 == 0 and n <= 10] if cfg.N_list else [4, 6, 8, 10]
    if not n_list:
        raise ConfigError("verify uses even N <= 10")
    report = run_checks(n_list, bound=cfg.residual_bound, loop_steps=cfg.loop_steps)
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    for check in report["checks"]:
        status = "PASS" if check["passed"] else "FAIL"
        print(f"{status} {check['name']}: residual {check['residual']:.3e} < {check['tolerance']:.1e}",
              file=sys.stderr)
    return EXIT_OK if report["passed"] else EXIT_VERIFY


def cmd_qgt(cfg: RunConfig) -> int:
    rows = []
    for n in cfg.n_values:
        chain = ChainSpec(n)
        params = ModelParams(cfg.r_values[0], cfg.h_min)
        sos = oracle.qgt(chain, params, "sum-over-states")
        proj = oracle.qgt(chain, params, "projector-derivative", delta=1e-4)
        deviation = float(np.max(np.abs(sos.t - proj.t)))
        for name, t in (("sum-over-states", sos), ("projector-derivative", proj)):
            for i, a in enumerate("rh"):
                for j, b in enumerate("rh"):
                    rows.append([n, params.r, params.h, name, a + b, t.t[i, j].real, t.t[i, j].imag,
                                 deviation])
    write_csv(rows, ["N", "r", "h", "method", "component", "re", "im", "max_method_deviation"], cfg.out)
    return EXIT_OK


def cmd_fringes(cfg: RunConfig) -> int:
    chain = ChainSpec(cfg.N)
    params = ModelParams(cfg.r_values[0], cfg.h_min)
    psi = oracle.even_ground_state(chain, params)
    lam, xi_max = oracle.exact_entanglement_eigenvalue(psi)
    loop = oracle.LoopSpec(BETA_P_CONVENTIONS[cfg.loop_extent], cfg.loop_steps)
    amp = oracle.interference_amplitude(chain, params, xi_max, loop, psi=psi)
    rec = oracle.fringe_readout(amp, lam**2)
    rows = [[f, i0, rec.extracted_visibility, rec.extracted_phase, abs(amp), float(np.angle(amp))]
            for f, i0 in rec.samples]
    write_csv(rows, ["f", "intensity", "fit_visibility", "fit_phase", "abs_A", "arg_A"], cfg.out)
    return EXIT_OK


def cmd_scaling(cfg: RunConfig) -> int:
    n_list = cfg.N_list or [16, 32, 64, 128]
    table = finite_size_scan(cfg.r_values[0], n_list, cfg.h_grid)
    rows = [[n, hp, pv, table.slope, table.intercept]
            for n, hp, pv in zip(table.n_sites, table.h_peak, table.peak_value)]
    write_csv(rows, ["N", "h_peak", "peak_value", "fit_slope_lnN", "fit_intercept"], cfg.out)
    return EXIT_OK


def cmd_critical(cfg: RunConfig) -> int:
    rows = []
    for r in cfg.r_values:
        n = None if cfg.mode == "thermo" else cfg.N
        tasks = [(cfg.mode, r, float(h), n, cfg.loop_extent, cfg.tol_quad, cfg.tol_opt, cfg.loop_steps)
                 for h in cfg.h_grid]
        pts = _run_tasks(tasks, cfg.threads)
        rep = critical_report(cfg.h_grid, [p.epsilon for p in pts], [p.xi_max for p in pts])
        cusp = cusp_structure(r, cfg.h_grid) if cfg.mode == "thermo" and rep.h_s_estimate else None
        rows.append([r, rep.h_peak, rep.peak_value, rep.h_s_estimate, rep.cusp_flag,
                     None if cusp is None else cusp.h_s,
                     None if cusp is None else cusp.beta_g_ratio,
                     None if cusp is None else cusp.delta_beta_ratio])
    write_csv(rows, ["r", "h_peak", "peak_value", "h_s_estimate", "cusp_flag", "h_s_refined",
                     "beta_g_second_derivative_jump", "delta_beta_first_derivative_jump"], cfg.out)
    return EXIT_OK


HANDLERS = {"sweep": cmd_sweep, "verify": cmd_verify, "qgt": cmd_qgt, "fringes": cmd_fringes,
            "scaling": cmd_scaling, "critical": cmd_critical}


def main(argv=None) -> int:
    try:
        cfg = load_config(argv)
    except (ConfigError, OSError) as exc:
        print(f"xyge: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except SystemExit as exc:  # argparse
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    try:
        with threadpool_limits(limits=1):
            return HANDLERS[cfg.command](cfg)
    except (ConfigError, ValueError) as exc:
        print(f"xyge: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (QuadratureError, oracle.DegenerateGroundState, oracle.IllConditionedLoop,
            IndeterminateAngle, FloatingPointError) as exc:
        print(f"xyge: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
