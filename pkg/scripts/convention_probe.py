"""Which product-state loop extent makes delta_beta vanish in the XX limit, on exact small chains."""

import argparse

from xyge.analysis import convention_probe
from xyge.thermo import SELECTED_CONVENTION

if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="6,8,10")
    parser.add_argument("--fields", default="0.45,0.5,0.6,0.8")
    args = parser.parse_args()
    sizes = tuple(int(x) for x in args.sizes.split(","))
    fields = tuple(float(x) for x in args.fields.split(","))
    probe = convention_probe(sizes, fields)
    for conv, res in probe.residuals.items():
        print(f"{conv:>4}: max |beta_g - beta_p| = {res:.3e}")
    for n, sel in probe.per_size.items():
        print(f"N={n}: selected {sel}")
    print(f"selected: {probe.selected} (package default: {SELECTED_CONVENTION})")
