"""Scattering check: couplings die out and b(t) approaches the spectrum.

    python scripts/asymptotic_freeness.py --n 3 --t-end 50
"""
import argparse

import numpy as np

from toda.dynamics import integrate
from toda.sampling import random_flaschka_state
from toda.spectral import moser_map


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=3)
    ap.add_argument("--t-end", type=float, default=50.0)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--min-gap", type=float, default=0.5)
    args = ap.parse_args()
    state = random_flaschka_state(args.n, np.random.default_rng(args.seed), min_gap=args.min_gap)
    lam = moser_map(state).lam
    print("lam      ", np.array2string(lam, precision=10))
    for s in integrate(state, args.t_end, np.linspace(0, args.t_end, 6)):
        print(f"t={s.t:6.1f} max a {np.max(s.state.a):.3e}  b {np.array2string(s.state.b, precision=10)}")


if __name__ == "__main__":
    main()
