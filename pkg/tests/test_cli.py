import json
import math

import pytest

from xyge.cli import (EXIT_INVALID, EXIT_NUMERICAL, EXIT_OK, EXIT_VERIFY, HEADER, ConfigError,
                      RunConfig, fmt, load_config, main, read_config_file)


def run(tmp_path, *args, name="out.csv"):
    out = tmp_path / name
    code = main(list(args) + ["--out", str(out)])
    return code, out.read_text() if out.exists() else ""


def test_fmt():
    assert fmt(-0.0) == "0" and fmt(0.0) == "0"
    assert fmt(None) == ""
    assert fmt(1 / 3) == "0.333333333333"
    assert fmt(8) == "8"


def test_sweep_header_and_rows(tmp_path):
    code, text = run(tmp_path, "sweep", "--h-steps", "5")
    assert code == EXIT_OK
    lines = text.split("\n")
    assert lines[0] == ",".join(HEADER)
    assert len(lines) == 7 and lines[-1] == ""
    first = lines[1].split(",")
    assert first[0] == "thermo" and first[1] == "" and first[3] == "0.2"
    assert "\r" not in text


def test_sweep_ordering_and_derivative(tmp_path):
    code, text = run(tmp_path, "sweep", "--mode", "finite", "--N-list", "6,8", "--r-list", "1,0.5",
                     "--h-steps", "3", "--derivative")
    assert code == EXIT_OK
    rows = [line.split(",") for line in text.strip().split("\n")]
    assert rows[0][len(HEADER):] == ["d_epsilon_dh", "d_beta_g_dh", "d_delta_beta_dh"]
    keys = [(float(r[2]), int(r[1]), float(r[3])) for r in rows[1:]]
    assert keys == [(r, n, h) for r in (1.0, 0.5) for n in (6, 8) for h in (0.2, 1.1, 2.0)]


def test_sweep_plot(tmp_path):
    plot = tmp_path / "p.svg"
    code, _ = run(tmp_path, "sweep", "--h-steps", "7", "--derivative", "--plot", str(plot))
    assert code == EXIT_OK
    svg = plot.read_text()
    assert svg.startswith("<svg") and "<polyline" in svg


def test_thread_count_does_not_change_output(tmp_path):
    args = ["sweep", "--r-list", "1,0.3", "--h-steps", "9", "--derivative"]
    _, a = run(tmp_path, *args, "--threads", "1", name="a.csv")
    _, b = run(tmp_path, *args, "--threads", "3", name="b.csv")
    _, c = run(tmp_path, *args, "--threads", "3", name="c.csv")
    assert a == b == c


def test_xx_sweep_zero_delta_beta(tmp_path):
    _, text = run(tmp_path, "sweep", "--r", "0", "--h-min", "0.1", "--h-max", "1.9", "--h-steps", "19")
    for line in text.strip().split("\n")[1:]:
        assert abs(float(line.split(",")[8])) < 1e-8


@pytest.mark.parametrize("args", [
    ["sweep", "--r", "1.5"],
    ["sweep", "--h-min", "-1"],
    ["sweep", "--h-min", "2", "--h-max", "1"],
    ["sweep", "--h-steps", "2"],
    ["sweep", "--mode", "finite", "--N", "7"],
    ["sweep", "--mode", "exact", "--N", "14"],
    ["sweep", "--loop-steps", "10"],
    ["sweep", "--threads", "0"],
    ["sweep", "--unknown"],
    ["nonsense"],
    ["sweep", "--config", "/nonexistent/file"],
])
def test_invalid_input_exit_code(args, capsys):
    assert main(args) == EXIT_INVALID


def test_non_convergence_exit_code(tmp_path):
    code, _ = run(tmp_path, "sweep", "--h-steps", "3", "--tol-quad", "1e-30")
    assert code == EXIT_NUMERICAL


def test_config_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nr = 0.5\nh-steps = 5\nN = 6\nmode = finite\n")
    config = load_config(["sweep", "--config", str(cfg), "--N", "8"])
    assert config.r == 0.5 and config.h_steps == 5 and config.mode == "finite"
    assert config.N == 8  # command line beats file
    assert RunConfig().h_steps == 361  # defaults untouched


def test_config_file_errors(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = blue\n")
    with pytest.raises(ConfigError):
        read_config_file(str(bad))
    bad.write_text("r 0.5\n")
    with pytest.raises(ConfigError):
        read_config_file(str(bad))


def test_verify_report(tmp_path):
    code, text = run(tmp_path, "verify", "--N-list", "4,6", name="report.json")
    assert code == EXIT_OK
    report = json.loads(text)
    assert report["passed"] and report["convention_probe"]["selected"] == "pi"
    assert all(c["residual"] < c["tolerance"] for c in report["checks"])


def test_verify_zero_bound_fails(tmp_path):
    code, text = run(tmp_path, "verify", "--N-list", "4", "--residual-bound", "0", name="report.json")
    assert code == EXIT_VERIFY
    report = json.loads(text)
    # every check is still listed
    assert len(report["checks"]) == 9 and not report["passed"]


def test_qgt_command(tmp_path):
    code, text = run(tmp_path, "qgt", "--N", "8", "--r", "0.5", "--h-min", "1.5")
    assert code == EXIT_OK
    rows = text.strip().split("\n")[1:]
    assert len(rows) == 8
    assert float(rows[0].split(",")[-1]) < 1e-6


def test_fringes_command(tmp_path):
    code, text = run(tmp_path, "fringes", "--N", "8", "--r", "1", "--h-min", "1.2")
    assert code == EXIT_OK
    rows = [list(map(float, line.split(","))) for line in text.strip().split("\n")[1:]]
    assert len(rows) == 64
    f, i0, vis, phase, abs_a, arg_a = rows[0]
    assert abs(vis - abs_a) < 1e-6 and abs(math.remainder(phase - arg_a, 2 * math.pi)) < 1e-6


def test_scaling_command(tmp_path):
    code, text = run(tmp_path, "scaling", "--r", "1", "--h-min", "0.9", "--h-max", "1.1", "--h-steps", "41")
    assert code == EXIT_OK
    peaks = [float(line.split(",")[2]) for line in text.strip().split("\n")[1:]]
    assert len(peaks) == 4 and all(a < b for a, b in zip(peaks, peaks[1:]))


def test_critical_command(tmp_path):
    code, text = run(tmp_path, "critical", "--r", "1", "--h-min", "0.8", "--h-max", "1.4", "--h-steps", "121")
    assert code == EXIT_OK
    row = text.strip().split("\n")[1].split(",")
    assert 0.98 <= float(row[1]) <= 1.02 and row[4] == "1"
