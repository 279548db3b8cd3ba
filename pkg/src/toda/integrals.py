"""Conserved quantities of the open Toda lattice.

Besides the N spectral invariants there are N-1 extra integrals built from
the residue lifts,

    I_j = (r_j / r_{j+1})^2 exp(F_{j,j+1}),
    F_{j,k} = 2 (lam_k - lam_j) / H_1 * ln(prod_i r_i),

with H_1 = sum(lam). Under r_i' = -lam_i r_i the two factors change at equal
and opposite rates, so I_j is constant as long as ``r`` is a dynamical lift
(``canonical_lift`` or an image of ``spectral_flow``). ``flipped_sign=True``
evaluates the exponent with the opposite sign, lam_j - lam_k; that variant
is *not* conserved and grows/decays like exp(4 (lam_{j+1} - lam_j) t).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .core import EXP_MAX, FlaschkaState, PhaseState, SpectralPoint, flaschka_forward, jacobi_matrix
from .errors import GaugeSingularityError, InvariantError, RangeError
from .spectral import canonical_lift, moser_map

H1_TOL = 1e-8
FD_REL_STEP = 1e-6
RANK_TOL = 1e-10

PointLike = Union[SpectralPoint, tuple]


def _raw(point: PointLike) -> tuple[np.ndarray, np.ndarray]:
    """(lam, r) arrays; a bare tuple skips SpectralPoint validation."""
    if isinstance(point, SpectralPoint):
        return point.lam, point.r
    lam, r = point
    return np.asarray(lam, dtype=float), np.asarray(r, dtype=float)


def _h1(lam: np.ndarray) -> float:
    h1 = float(np.sum(lam))
    if abs(h1) < H1_TOL:
        raise GaugeSingularityError(f"H_1 = sum(lam) = {h1:.3e} vanishes; extra integrals undefined")
    return h1


@dataclass(frozen=True)
class ConservedSet:
    h: np.ndarray          # power sums sum lam^k, k = 1..N
    i_extra: np.ndarray    # I_1 .. I_{N-1}
    lift_q_sum: float


@dataclass(frozen=True)
class NoetherSetN2:
    h1: float
    j1: float
    i1: float


@dataclass(frozen=True)
class IndependenceReport:
    matrix: np.ndarray
    rank: int
    d_sub: float
    singular_values: np.ndarray


def power_sums(point: PointLike) -> np.ndarray:
    lam, _ = _raw(point)
    return np.array([np.sum(lam ** k) for k in range(1, lam.size + 1)])


def trace_integrals(state: FlaschkaState) -> np.ndarray:
    """(1/j) tr L^j for j = 1..N, from explicit matrix powers."""
    L = jacobi_matrix(state).matrix
    out = np.empty(state.n)
    P = np.eye(state.n)
    for j in range(1, state.n + 1):
        P = P @ L
        out[j - 1] = np.trace(P) / j
    return out


def log_prod_r(point: PointLike) -> float:
    return float(np.sum(np.log(_raw(point)[1])))


def exponent_f(point: PointLike, j: int, k: int, flipped_sign: bool = False) -> float:
    """F_{j,k} (1-based indices)."""
    lam, r = _raw(point)
    diff = lam[j - 1] - lam[k - 1] if flipped_sign else lam[k - 1] - lam[j - 1]
    return 2.0 * diff / _h1(lam) * float(np.sum(np.log(r)))


def _log_extra(lam: np.ndarray, r: np.ndarray, flipped_sign: bool) -> np.ndarray:
    if np.any(r <= 0):
        raise InvariantError("extra integrals need positive residue lifts")
    h1 = _h1(lam)
    log_r = np.log(r)
    sign = -1.0 if flipped_sign else 1.0
    return 2.0 * (log_r[:-1] - log_r[1:]) + sign * 2.0 * (lam[1:] - lam[:-1]) / h1 * log_r.sum()


def _exp_checked(x: np.ndarray) -> np.ndarray:
    if np.any(x > EXP_MAX):
        raise RangeError(f"extra integral overflows (log value {float(np.max(x)):.4g})")
    return np.exp(x)


def extra_integrals(point: PointLike, flipped_sign: bool = False) -> np.ndarray:
    """(I_1, ..., I_{N-1}); ``r`` must be a dynamical lift, not the unit gauge."""
    return _exp_checked(_log_extra(*_raw(point), flipped_sign))


def extra_integral(point: PointLike, j: int, flipped_sign: bool = False) -> float:
    lam, r = _raw(point)
    if not 1 <= j <= lam.size - 1:
        raise ValueError(f"j must lie in 1..{lam.size - 1}, got {j}")
    return float(extra_integrals((lam, r), flipped_sign)[j - 1])


def phase_lift(state: PhaseState) -> SpectralPoint:
    """(q, p) -> (lam, r) with the canonical lift prod(r) = exp(sum(q) / 2)."""
    return canonical_lift(moser_map(flaschka_forward(state)), float(np.sum(state.q)))


def extra_integral_qp(state: PhaseState, j: int, flipped_sign: bool = False) -> float:
    return extra_integral(phase_lift(state), j, flipped_sign)


def conserved_set(state: Union[PhaseState, FlaschkaState, SpectralPoint], q_sum: float = 0.0,
                  flipped_sign: bool = False) -> ConservedSet:
    """Power sums and extra integrals of a state in any chart.

    For FlaschkaState the lift uses ``q_sum`` (the value of sum(q) the state
    stands for); a SpectralPoint's own ``r`` is taken as the lift.
    """
    if isinstance(state, PhaseState):
        q_sum = float(np.sum(state.q))
        point = phase_lift(state)
    elif isinstance(state, FlaschkaState):
        point = canonical_lift(moser_map(state), q_sum)
    else:
        point = state
        q_sum = 2.0 * point.log_prod_r
    try:
        extra = extra_integrals(point, flipped_sign)
    except GaugeSingularityError:
        extra = np.full(point.n - 1, np.nan)
    return ConservedSet(power_sums(point), extra, q_sum)


def time_function_g(state: PhaseState) -> float:
    """(q_1 + q_2) / (p_1 + p_2); satisfies {G, H} = 1 for two particles."""
    total_p = state.p[0] + state.p[1]
    if abs(total_p) < H1_TOL:
        raise GaugeSingularityError("p_1 + p_2 vanishes")
    return float((state.q[0] + state.q[1]) / total_p)


def noether_n2(state: PhaseState) -> NoetherSetN2:
    """The two-particle integrals H_1, J_1, I_1 obtained from Noether's theorem."""
    if state.n != 2:
        raise ValueError(f"noether_n2 needs n = 2, got n = {state.n}")
    (q1, q2), (p1, p2) = state.q, state.p
    if abs(p1 + p2) < H1_TOL:
        raise GaugeSingularityError("total momentum p_1 + p_2 vanishes")
    d = p1 - p2
    j1 = d * d + 4.0 * np.exp(q1 - q2)
    s = np.sqrt(j1)
    i1 = (d + s) / (d - s) * np.exp(s * (q1 + q2) / (p1 + p2))
    return NoetherSetN2(float(-0.5 * (p1 + p2)), float(j1), float(i1))


def homogeneous_w(n: int, x: float, y: float) -> float:
    """Complete homogeneous polynomial of degree n in x, y; zero for n < 0."""
    if n < 0:
        return 0.0
    return float(sum(x ** k * y ** (n - k) for k in range(n + 1)))


def predicted_h_i_bracket(n: int, j: int, point: PointLike) -> float:
    """Closed-form {H_n, I_j} = 2 c_n (lam_j - lam_{j+1}) / H_1 * E_j * I_j.

    c_n = 1 for n >= 2, c_1 = N / (N - 2), and
    E_j = sum' lam_i^{n-1} - (sum' lam_i) w(n-2) - 2 lam_j lam_{j+1} w(n-3),
    where sum' skips i = j, j+1 and w is evaluated at (lam_j, lam_{j+1}).
    Agrees in magnitude with the bracket of H_n = (1/n) sum lam^n.
    """
    lam, r = _raw(point)
    N = lam.size
    if not 1 <= j <= N - 1:
        raise ValueError(f"j must lie in 1..{N - 1}, got {j}")
    if not 1 <= n <= N:
        raise ValueError(f"n must lie in 1..{N}, got {n}")
    if n == 1 and N == 2:
        raise ValueError("c_1 = N/(N-2) is singular for N = 2")
    h1 = _h1(lam)
    c_n = N / (N - 2) if n == 1 else 1.0
    x, y = lam[j - 1], lam[j]
    rest = np.delete(lam, [j - 1, j])
    e_j = (np.sum(rest ** (n - 1)) - np.sum(rest) * homogeneous_w(n - 2, x, y)
           - 2.0 * x * y * homogeneous_w(n - 3, x, y))
    i_j = extra_integral((lam, r), j)
    return float(2.0 * c_n * (x - y) / h1 * e_j * i_j)


def independence_jacobian(point: PointLike, rel_step: float = FD_REL_STEP,
                          rank_tol: float = RANK_TOL) -> IndependenceReport:
    """Jacobian of (H_1..H_N, I_1..I_{N-1}) in (lam_1..lam_N, r_1..r_N).

    H_k = (1/k) sum lam^k here (the trace normalization), with analytic
    partials lam_i^{k-1}; the I_j columns use central differences with step
    rel_step * max(1, |x|). The rank counts singular values above
    rank_tol * largest after scaling each row to unit norm. ``d_sub`` is the
    determinant with column N+1 (the r_1 column) deleted.
    """
    lam, r = _raw(point)
    N = lam.size
    x0 = np.concatenate((lam, r))
    J = np.zeros((2 * N - 1, 2 * N))
    for k in range(1, N + 1):
        J[k - 1, :N] = lam ** (k - 1)
    for col in range(2 * N):
        h = rel_step * max(1.0, abs(x0[col]))
        xp, xm = x0.copy(), x0.copy()
        xp[col] += h
        xm[col] -= h
        fp = extra_integrals((xp[:N], xp[N:]))
        fm = extra_integrals((xm[:N], xm[N:]))
        J[N:, col] = (fp - fm) / (2.0 * h)
    scaled = J / np.linalg.norm(J, axis=1, keepdims=True)
    sv = np.linalg.svd(scaled, compute_uv=False)
    rank = int(np.sum(sv > rank_tol * sv[0]))
    d_sub = float(np.linalg.det(np.delete(J, N, axis=1)))
    return IndependenceReport(J, rank, d_sub, sv)


def d_sub_closed_form(point: PointLike, generalized: bool = False) -> float:
    """-2^{N-1} N r_1^2 / (R r_N^3) (lam_1 / H_1) e^{F_{1,N}} prod_{i<j}(lam_i - lam_j).

    As printed, R = r_{N-2} r_{N-1}, which matches the Jacobian only at
    N = 4. ``generalized=True`` uses R = r_2 ... r_{N-1} and the sign
    (-1)^{(N-3)(N-4)/2} (a reversal of N-3 columns), which matches the
    determinant, sign included, for every N >= 3.
    """
    lam, r = _raw(point)
    N = lam.size
    if N < 3:
        raise ValueError("closed form references r_{N-2}; needs N >= 3")
    h1 = _h1(lam)
    denom = np.prod(r[1 : N - 1]) if generalized else r[N - 3] * r[N - 2]
    vander = np.prod([lam[i] - lam[j] for i in range(N) for j in range(i + 1, N)])
    f1n = exponent_f((lam, r), 1, N)
    sign = (-1.0) ** ((N - 3) * (N - 4) // 2) if generalized else 1.0
    return float(-sign * (2.0 ** (N - 1)) * N * r[0] ** 2 / (denom * r[-1] ** 3)
                 * lam[0] / h1 * np.exp(f1n) * vander)

