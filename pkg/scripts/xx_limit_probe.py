"""max_h |d delta_beta / dh| near h = 1 as r -> 0, and its vanishing at r = 0."""

import argparse

import numpy as np

from xyge.analysis import xx_singularity_probe

if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--r-list", default="0.2,0.1,0.05,0.02")
    parser.add_argument("--step", type=float, default=1e-4)
    args = parser.parse_args()
    grid = np.round(np.arange(0.98, 1.02 + args.step / 2, args.step), 12)
    for row in xx_singularity_probe([float(x) for x in args.r_list.split(",")], grid):
        print(f"r={row.r:<6g} max |d delta_beta/dh| = {row.max_abs_derivative:.4g} at h={row.h_at_max:.4f}")
