"""Error of the exact solver against the ODE for the three inversion routes.

Moment-based Hankel determinants lose accuracy as the flowed weights spread
over many decades; Heine's atom-sum form and Lanczos do not.
"""
import argparse

import numpy as np

from toda.dynamics import integrate
from toda.errors import NumericalError
from toda.sampling import random_flaschka_state
from toda.stieltjes import exact_solution


def _err(x, y):
    return max(np.max(np.abs(x.a - y.a)), np.max(np.abs(x.b - y.b)))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=4)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    state = random_flaschka_state(args.n, np.random.default_rng(args.seed))
    times = [0.5, 1, 2, 3, 5, 8]
    print(f"{'t':>4} {'lanczos':>10} {'heine':>10} {'moments':>10} {'moments/mp':>11}")
    for s in integrate(state, times[-1], times):
        row = [exact_solution(state, s.t)]
        row.append(exact_solution(state, s.t, method="hankel"))
        for precision in ("double", "high"):
            try:
                row.append(exact_solution(state, s.t, method="hankel", evaluation="moments",
                                          precision=precision))
            except NumericalError:
                row.append(None)
        cells = ["failed" if r is None else f"{_err(r, s.state):.1e}" for r in row]
        print(f"{s.t:>4g} {cells[0]:>10} {cells[1]:>10} {cells[2]:>10} {cells[3]:>11}")


if __name__ == "__main__":
    main()
