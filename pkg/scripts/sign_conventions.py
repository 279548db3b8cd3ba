"""Exponent sign of the extra integrals and the two-particle correspondence.

Integrates random states and reports the relative drift of I_j with the
conserved exponent sign and with the opposite one, next to the predicted
drift factor exp(4 (lam_j - lam_{j+1}) t). For N = 2 it also prints the
spectral I_1 against the Noether integral.
"""
import argparse

import numpy as np

from toda.core import flaschka_inverse
from toda.dynamics import integrate
from toda.integrals import extra_integral_qp, extra_integrals, noether_n2, phase_lift
from toda.sampling import random_flaschka_state


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=3)
    ap.add_argument("--t-end", type=float, default=2.0)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    phase = flaschka_inverse(random_flaschka_state(args.n, rng), 0.0)
    lam = phase_lift(phase).lam
    print("lam =", np.array2string(lam, precision=6))
    base = extra_integrals(phase_lift(phase))
    base_p = extra_integrals(phase_lift(phase), flipped_sign=True)
    for s in integrate(phase, args.t_end, np.linspace(0, args.t_end, 5)):
        point = phase_lift(s.state)
        drift = extra_integrals(point) / base - 1
        printed = base_p / extra_integrals(point, flipped_sign=True)
        law = np.exp(4 * (lam[:-1] - lam[1:]) * s.t)
        print(f"t={s.t:5.2f}  drift {np.max(np.abs(drift)):.2e}  "
              f"printed I(0)/I(t) {np.array2string(printed, precision=6)}  "
              f"law {np.array2string(law, precision=6)}")
    if args.n == 2:
        print("spectral I_1 =", extra_integral_qp(phase, 1), " Noether I_1 =", noether_n2(phase).i1)


if __name__ == "__main__":
    main()
