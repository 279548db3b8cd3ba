"""Command-line interface.

Exit codes: 0 success, 1 verification failure, 2 invalid input,
3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from .core import FlaschkaState, SpectralPoint
from .dynamics import IntegratorConfig, integrate
from .errors import InvariantError, NumericalError, RangeError
from .integrals import conserved_set
from .io import chart_columns, chart_values, format_float, load_state, state_to_document
from .sampling import random_flaschka_state
from .spectral import canonical_lift, moser_map
from .stieltjes import exact_solution, lanczos_inverse, stieltjes_inverse
from .verify import as_flaschka, run_checks

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _emit(args, text: str) -> None:
    if args.output:
        with open(args.output, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_json(args, obj) -> None:
    _emit(args, json.dumps(obj, indent=2) + "\n")


def _input_state(args):
    if getattr(args, "random", None) is not None:
        if args.random < 2:
            raise InvariantError("--random needs n >= 2")
        return random_flaschka_state(args.random, np.random.default_rng(args.seed)), 0.0
    if not args.input:
        raise UsageError("provide --input FILE" + (" or --random N" if hasattr(args, "random") else ""))
    return load_state(args.input)


def _reconstruct(point: SpectralPoint, args) -> FlaschkaState:
    if args.method == "hankel":
        return stieltjes_inverse(point, precision=args.precision)
    return lanczos_inverse(point)


def cmd_simulate(args) -> int:
    state, q_sum = _input_state(args)
    if args.t_end < 0:
        raise InvariantError("--t-end must be non-negative")
    times = [0.0] if args.t_end == 0 else np.linspace(0.0, args.t_end, max(args.samples, 1))
    config = IntegratorConfig(method=args.integrator, rel_tol=args.rel_tol, abs_tol=args.abs_tol,
                              max_step=args.step if args.integrator == "leapfrog" else np.inf)
    traj = integrate(state, float(times[-1]), times, config)
    n = state.n
    header = (["t"] + chart_columns(state) + [f"H{k}" for k in range(1, n + 1)]
              + [f"I{j}" for j in range(1, n)])
    rows = []
    h1 = None
    for sample in traj:
        lift_q_sum = q_sum
        if isinstance(sample.state, FlaschkaState):
            # sum(q) moves at -2 H_1 along the flow.
            h1 = h1 if h1 is not None else float(np.sum(state.b))
            lift_q_sum = q_sum - 2.0 * h1 * sample.t
        cs = conserved_set(sample.state, lift_q_sum, flipped_sign=args.paper_faithful_sign)
        rows.append([sample.t, *chart_values(sample.state), *cs.h, *cs.i_extra])
    lines = [",".join(header)] + [",".join(format_float(v) for v in row) for row in rows]
    _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_spectra(args) -> int:
    state, q_sum = _input_state(args)
    flaschka, q_sum = as_flaschka(state, q_sum)
    point = moser_map(flaschka)
    _emit_json(args, {"lambda": point.lam.tolist(), "rho": point.rho.tolist(),
                      "r_canonical": canonical_lift(point, q_sum).r.tolist()})
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    state, q_sum = _input_state(args)
    if not isinstance(state, SpectralPoint):
        raise InvariantError("reconstruct expects a spectral document {lambda, r}")
    rec = _reconstruct(state, args)
    _emit_json(args, {"a": rec.a.tolist(), "b": rec.b.tolist()})
    return EXIT_OK


def cmd_exact(args) -> int:
    state, q_sum = _input_state(args)
    flaschka, q_sum = as_flaschka(state, q_sum)
    out = exact_solution(flaschka, args.t_end, method=args.method, precision=args.precision)
    doc = state_to_document(out, q_sum - 2.0 * float(np.sum(flaschka.b)) * args.t_end)
    _emit_json(args, doc)
    return EXIT_OK


def cmd_roundtrip(args) -> int:
    state, q_sum = _input_state(args)
    flaschka, _ = as_flaschka(state, q_sum)
    rec = _reconstruct(moser_map(flaschka), args)
    err = max(np.max(np.abs(rec.a - flaschka.a)), np.max(np.abs(rec.b - flaschka.b)))
    _emit_json(args, {"max_abs_error": float(err), "method": args.method})
    return EXIT_OK


def cmd_verify(args) -> int:
    state, q_sum = _input_state(args)
    flaschka, q_sum = as_flaschka(state, q_sum)
    report = run_checks(flaschka, q_sum, t_end=args.t_end, seed=args.seed,
                        flipped_sign=args.paper_faithful_sign)
    _emit(args, report.format() + "\n")
    return EXIT_OK if report.passed else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="toda", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, random=False):
        p.add_argument("--input", help="state document (JSON)")
        p.add_argument("-o", "--output", help="write here instead of stdout")
        if random:
            p.add_argument("--random", type=int, metavar="N", help="use a random N-particle state")
            p.add_argument("--seed", type=int, default=0)

    def inverse_flags(p):
        p.add_argument("--method", choices=["hankel", "lanczos"], default="lanczos")
        p.add_argument("--precision", choices=["double", "high"], default="double")

    p = sub.add_parser("simulate", help="integrate and write a CSV trajectory")
    common(p)
    p.add_argument("--t-end", type=float, required=True)
    p.add_argument("--samples", type=int, default=11)
    p.add_argument("--integrator", choices=["rk45", "leapfrog"], default="rk45")
    p.add_argument("--rel-tol", type=float, default=1e-10)
    p.add_argument("--abs-tol", type=float, default=1e-10)
    p.add_argument("--step", type=float, default=1e-3, help="leapfrog step size")
    p.add_argument("--paper-faithful-sign", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("spectra", help="eigenvalues, residues and canonical lift")
    common(p)
    p.set_defaults(func=cmd_spectra)

    p = sub.add_parser("reconstruct", help="(lambda, r) -> (a, b)")
    common(p)
    inverse_flags(p)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("exact", help="exact solution at time --t-end")
    common(p)
    inverse_flags(p)
    p.add_argument("--t-end", type=float, required=True)
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("roundtrip", help="direct then inverse spectral map")
    common(p, random=True)
    inverse_flags(p)
    p.set_defaults(func=cmd_roundtrip)

    p = sub.add_parser("verify", help="run the verification battery")
    common(p, random=True)
    p.add_argument("--t-end", type=float, default=10.0)
    p.add_argument("--paper-faithful-sign", action="store_true")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except (InvariantError, UsageError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NumericalError, RangeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
