"""Field sweeps behind the derivative figures: thermo curves for three anisotropies plus finite-N insets.

Writes CSV and SVG files into the output directory (default ./figures).
"""

import argparse
from pathlib import Path

from xyge.cli import main


def run(out: Path, threads: int):
    out.mkdir(parents=True, exist_ok=True)
    common = ["--h-min", "0.2", "--h-max", "2.0", "--h-steps", "361", "--derivative", "--threads", str(threads)]
    jobs = {
        "thermo": ["sweep", "--r-list", "1,0.5,0.05", "--mode", "thermo"],
        "finite_r1": ["sweep", "--r", "1", "--mode", "finite", "--N-list", "16,32,64,128"],
        "exact_r1": ["sweep", "--r", "1", "--mode", "exact", "--N-list", "8,10", "--h-steps", "91"],
    }
    for name, args in jobs.items():
        extra = common if "--h-steps" not in args else [a for a in common if a not in ("--h-steps", "361")]
        code = main(args + extra + ["--out", str(out / f"{name}.csv"), "--plot", str(out / f"{name}.svg")])
        print(f"{name}: exit {code}")


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", type=Path, default=Path("figures"))
    parser.add_argument("--threads", type=int, default=1)
    args = parser.parse_args()
    run(args.out, args.threads)
