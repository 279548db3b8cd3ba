"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v -s`` (or see the
summary section pytest prints at the end of any run).
"""
import numpy as np
import pytest

from toda import brackets as br
from toda.core import FlaschkaState, PhaseState, SpectralPoint, flaschka_inverse
from toda.dynamics import IntegratorConfig, integrate
from toda.integrals import (
    conserved_set,
    d_sub_closed_form,
    extra_integral_qp,
    extra_integrals,
    independence_jacobian,
    noether_n2,
    phase_lift,
    predicted_h_i_bracket,
)
from toda.sampling import random_flaschka_state, weyl_test_points
from toda.spectral import (
    canonical_lift,
    moser_map,
    weyl_continued_fraction,
    weyl_partial_fraction,
    weyl_resolvent,
)
from toda.stieltjes import exact_solution, lanczos_inverse, moments, stieltjes_inverse

TIGHT = IntegratorConfig(rel_tol=1e-10, abs_tol=1e-10)


def _max_err(x: FlaschkaState, y: FlaschkaState) -> float:
    return float(max(np.max(np.abs(x.a - y.a)), np.max(np.abs(x.b - y.b))))


def _lifted(state: FlaschkaState, q_sum: float) -> SpectralPoint:
    return canonical_lift(moser_map(state), q_sum)


def test_c01_isospectrality(criterion, rng):
    worst = 0.0
    times = np.linspace(0.0, 10.0, 21)
    for n in range(2, 7):
        for _ in range(4):
            state = random_flaschka_state(n, rng)
            lam0 = moser_map(state).lam
            for sample in integrate(state, 10.0, times, TIGHT):
                worst = max(worst, float(np.max(np.abs(moser_map(sample.state).lam - lam0))))
            # the canonical chart must agree too
            for sample in integrate(flaschka_inverse(state), 10.0, times[::5], TIGHT):
                lam = phase_lift(sample.state).lam
                worst = max(worst, float(np.max(np.abs(lam - lam0))))
    criterion(1, worst < 1e-8, f"max eigenvalue drift {worst:.2e} (< 1e-8), N = 2..6, t in [0, 10]")


def test_c02_independence_rank(criterion, rng):
    ranks = {}
    for n in (3, 4, 5):
        ranks[n] = [independence_jacobian(_lifted(random_flaschka_state(n, rng), rng.uniform(-2, 2))).rank
                    for _ in range(20)]
    full = all(r == 2 * n - 1 for n, rs in ranks.items() for r in rs)
    dropped = []
    for n in (3, 4, 5):
        point = _lifted(random_flaschka_state(n, rng), 0.5)
        lam = point.lam.copy()
        lam[1] = lam[0]
        dropped.append(independence_jacobian((lam, point.r)).rank)
    drops = all(r < 2 * n - 1 for n, r in zip((3, 4, 5), dropped))
    criterion(2, full and drops,
              f"rank 2N-1 at 60/60 points: {full}; collided ranks {dropped} for N = 3, 4, 5")


def test_c03_extra_integral_conservation(criterion, rng):
    times = np.linspace(0.0, 10.0, 11)
    worst = 0.0
    for n in (3, 4, 5):
        for _ in range(3):
            phase = flaschka_inverse(random_flaschka_state(n, rng), rng.uniform(-1, 1))
            values = np.array([conserved_set(s.state).i_extra
                               for s in integrate(phase, 10.0, times, TIGHT)])
            worst = max(worst, float(np.max(np.abs(values / values[0] - 1.0))))

    # Printed exponent sign: I(0)/I(t) = exp(4 (lam_j - lam_{j+1}) t).
    drift_err = 0.0
    for n in (3, 4, 5):
        phase = flaschka_inverse(random_flaschka_state(n, rng), rng.uniform(-1, 1))
        lam = phase_lift(phase).lam
        start = extra_integrals(phase_lift(phase), flipped_sign=True)
        for s in integrate(phase, 1.0, np.linspace(0.0, 1.0, 6), TIGHT):
            now = extra_integrals(phase_lift(s.state), flipped_sign=True)
            predicted = np.exp(4.0 * (lam[:-1] - lam[1:]) * s.t)
            drift_err = max(drift_err, float(np.max(np.abs((start / now) / predicted - 1.0))))
    ok = worst < 1e-6 and drift_err < 1e-4
    criterion(3, ok, f"I_j relative drift {worst:.2e} (< 1e-6); "
                     f"printed-sign drift law error {drift_err:.2e} (< 1e-4)")


def test_c04_two_particle_correspondence(criterion, rng):
    worst = 0.0
    count = 0
    while count < 100:
        q = rng.uniform(-2, 2, 2)
        p = rng.uniform(-3, 3, 2)
        if abs(p.sum()) <= 0.5:
            continue
        state = PhaseState(q, p)
        spectral = extra_integral_qp(state, 1)
        classical = noether_n2(state).i1
        worst = max(worst, abs(spectral + classical) / abs(classical))
        count += 1
    worked = PhaseState([np.log(2.0), -np.log(2.0)], [-4.0, -4.0])
    i_classical = noether_n2(worked).i1
    i_spectral = extra_integral_qp(worked, 1)
    ok = worst < 1e-9 and abs(i_classical + 1.0) < 1e-12 and abs(i_spectral - 1.0) < 1e-12
    criterion(4, ok, f"max |I + I_noether|/|I_noether| = {worst:.2e} over 100 states; "
                     f"worked point {i_classical:+.15f} / {i_spectral:+.15f}")


def test_c05_exact_solution_against_ode(criterion, rng):
    times = [1.0, 3.0, 5.0]
    lanczos_err = hankel_err = 0.0
    for n in range(2, 7):
        for _ in range(3):
            state = random_flaschka_state(n, rng)
            ode = integrate(state, 5.0, times, TIGHT)
            for sample in ode:
                exact = exact_solution(state, sample.t, method="lanczos")
                lanczos_err = max(lanczos_err, _max_err(exact, sample.state))
                if n <= 4:
                    exact = exact_solution(state, sample.t, method="hankel", precision="double")
                    hankel_err = max(hankel_err, _max_err(exact, sample.state))
    ok = lanczos_err < 1e-6 and hankel_err < 1e-5
    criterion(5, ok, f"lanczos {lanczos_err:.2e} (< 1e-6, N <= 6); "
                     f"hankel {hankel_err:.2e} (< 1e-5, N <= 4), t in {{1, 3, 5}}")


def test_c06_round_trip(criterion, rng):
    lanczos_err = double_err = high_err = 0.0
    for n in range(2, 13):
        for _ in range(3):
            state = random_flaschka_state(n, rng)
            point = moser_map(state)
            lanczos_err = max(lanczos_err, _max_err(lanczos_inverse(point), state))
            if n <= 5:
                rec = stieltjes_inverse(point, precision="double", evaluation="moments")
                double_err = max(double_err, _max_err(rec, state))
            if n <= 8:
                rec = stieltjes_inverse(point, precision="high", evaluation="moments")
                high_err = max(high_err, _max_err(rec, state))
    # c = (1, 2, 5, 14) is the moment sequence of lam = (3, 1), rho = (1/2, 1/2).
    worked = SpectralPoint([3.0, 1.0], [1.0, 1.0])
    rec = stieltjes_inverse(worked, evaluation="moments")
    moments_ok = np.allclose(moments(worked, 4).c, (1.0, 2.0, 5.0, 14.0), atol=1e-12, rtol=0)
    worked_err = _max_err(rec, FlaschkaState([1.0], [2.0, 2.0]))
    ok = (lanczos_err < 1e-9 and double_err < 1e-6 and high_err < 1e-9
          and worked_err < 1e-12 and moments_ok)
    criterion(6, ok, f"lanczos {lanczos_err:.1e} (N <= 12), hankel double {double_err:.1e} "
                     f"(N <= 5), high {high_err:.1e} (N <= 8), worked {worked_err:.1e}")


def test_c07_weyl_three_way(criterion, rng):
    worst = 0.0
    for k in range(50):
        state = random_flaschka_state(2 + k % 7, rng)
        point = moser_map(state)
        for x in weyl_test_points(point, 10, rng):
            vals = np.array([weyl_partial_fraction(point, x), weyl_continued_fraction(state, x),
                             weyl_resolvent(state, x)])
            worst = max(worst, float(np.ptp(vals) / np.max(np.abs(vals))))
    criterion(7, worst < 1e-10, f"max relative spread {worst:.2e} (< 1e-10), 50 states, N <= 8")


def test_c08_bracket_relations(criterion, rng):
    fine = br.BracketConfig(fd_step_scale=1e-6, structure="linear")
    worked = PhaseState([np.log(2.0), -np.log(2.0)], [-4.0, -4.0])
    gh = br.canonical_bracket(br.time_function_obs(), br.qp_hamiltonian_obs(), worked)
    gh_ok = abs(gh - 1.0) < 1e-6

    point = _lifted(random_flaschka_state(4, rng), 0.7)
    structure = np.array([[br.lambda_r_bracket(br.coordinate("x", i), br.coordinate("y", j), point, 0)
                           for j in range(4)] for i in range(4)])
    struct_err = float(np.max(np.abs(structure - np.diag(point.r))))

    pull = max(br.pullback_scaling_check(flaschka_inverse(random_flaschka_state(n, rng), 0.3)).max_scaling_error
               for n in (3, 4))

    inv1 = inv2 = inv2_scaled = 0.0
    for n in (3, 4):
        lifted = _lifted(random_flaschka_state(n, rng), rng.uniform(-1, 1))
        inv1 = max(inv1, br.involution_matrix(br.s1_family(n), lifted, fine)[1])
        inv2 = max(inv2, br.involution_matrix(br.s2_family(n), lifted, fine)[1])
        inv2_scaled = max(inv2_scaled, br.involution_matrix(br.s2_family(n), lifted, fine, scaled=True)[1])

    hn_err = 0.0
    for n_particles in (3, 4):
        for _ in range(2):
            lifted = _lifted(random_flaschka_state(n_particles, rng), rng.uniform(-1, 1))
            i_vals = extra_integrals(lifted)
            for n in range(1, n_particles + 1):
                for j in range(1, n_particles):
                    numeric = br.lambda_r_bracket(br.power_sum_obs(n, normalized=True),
                                                  br.extra_integral_obs(j), lifted, 0, fine)
                    predicted = predicted_h_i_bracket(n, j, lifted)
                    # n = 2 predicts exactly zero; measure against the size of I_j there.
                    scale = max(abs(predicted), abs(i_vals[j - 1]))
                    hn_err = max(hn_err, abs(abs(numeric) - abs(predicted)) / scale)

    ok = (gh_ok and struct_err < 1e-6 and pull < 1e-5 and inv1 < 1e-6 and inv2 < 1e-6
          and inv2_scaled < 1e-6 and hn_err < 1e-5)
    criterion(8, ok, f"{{G,H}} = {gh:.9f}; structure {struct_err:.1e}; pullback {pull:.1e}; "
                     f"S1 {inv1:.1e}; S2 {inv2:.1e} (scaled {inv2_scaled:.1e}); |{{H_n,I_j}}| vs prediction {hn_err:.1e}")


def test_c09_asymptotic_freeness(criterion, rng):
    a_max = b_err = 0.0
    for _ in range(5):
        # generic: eigenvalue gaps >= 0.5 so the couplings decay below 1e-6 by t = 50
        state = random_flaschka_state(3, rng, min_gap=0.5)
        lam = moser_map(state).lam
        final = integrate(state, 50.0, config=TIGHT)[-1].state
        a_max = max(a_max, float(np.max(np.abs(final.a))))
        b_err = max(b_err, float(np.max(np.abs(np.sort(final.b) - np.sort(lam)))))
    ok = a_max < 1e-6 and b_err < 1e-6
    criterion(9, ok, f"max |a_i(50)| = {a_max:.1e}; multiset |b - lam| = {b_err:.1e}")


def test_c10_subdeterminant_closed_form(criterion, rng):
    ratios = {}
    for n in (3, 4):
        ratios[n] = []
        for _ in range(10):
            point = _lifted(random_flaschka_state(n, rng), rng.uniform(-1, 1))
            ratios[n].append(abs(independence_jacobian(point).d_sub) / abs(d_sub_closed_form(point)))
    worst = {n: float(np.max(np.abs(np.array(r) - 1.0))) for n, r in ratios.items()}
    ok = all(w < 1e-5 for w in worst.values())
    criterion(10, ok, f"max |ratio - 1|: N=3 {worst[3]:.2e}, N=4 {worst[4]:.2e} (< 1e-5)")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v", "-s"]))
