"""Compare the independence subdeterminant with both closed forms, N = 3..7.

    python scripts/subdeterminant_scan.py --points 5
"""
import argparse

import numpy as np

from toda.integrals import d_sub_closed_form, independence_jacobian
from toda.sampling import random_flaschka_state
from toda.spectral import canonical_lift, moser_map


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    print(f"{'N':>2} {'d_sub/printed':>28} {'d_sub/generalized':>22} {'r_1':>10}")
    for n in range(3, 8):
        for _ in range(args.points):
            point = canonical_lift(moser_map(random_flaschka_state(n, rng)), rng.uniform(-1, 1))
            d = independence_jacobian(point).d_sub
            print(f"{n:>2} {d / d_sub_closed_form(point):>28.12g} "
                  f"{d / d_sub_closed_form(point, generalized=True):>22.12g} {point.r[0]:>10.4g}")


if __name__ == "__main__":
    main()
