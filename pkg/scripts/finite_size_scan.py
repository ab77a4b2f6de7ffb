"""Height and location of the d epsilon_N / dh peak against N, with the a ln N + b fit."""

import argparse

import numpy as np

from xyge.analysis import finite_size_scan

if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--r", type=float, default=1.0)
    parser.add_argument("--sizes", default="16,32,64,128,256,512")
    parser.add_argument("--step", type=float, default=1e-3)
    args = parser.parse_args()
    sizes = [int(x) for x in args.sizes.split(",")]
    grid = np.round(np.arange(0.9, 1.1 + args.step / 2, args.step), 12)
    table = finite_size_scan(args.r, sizes, grid)
    print(f"{'N':>6} {'h_peak':>8} {'peak':>10}")
    for n, h, v in zip(table.n_sites, table.h_peak, table.peak_value):
        print(f"{n:>6} {h:>8.4f} {v:>10.5f}")
    print(f"peak ~ {table.slope:.4f} ln N + {table.intercept:.4f}")
