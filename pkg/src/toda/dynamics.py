"""Equations of motion in each chart and time integration."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.integrate import solve_ivp

from .core import FlaschkaState, PhaseState, SpectralPoint, jacobi_matrix, lax_b_matrix, safe_exp
from .errors import IntegrationError, InvariantError
from .spectral import spectral_flow

State = Union[PhaseState, FlaschkaState, SpectralPoint]

METHODS = ("rk45", "leapfrog")


@dataclass(frozen=True)
class IntegratorConfig:
    """``rk45`` is the adaptive Dormand-Prince 5(4) pair; ``leapfrog`` is
    kick-drift-kick with fixed step ``max_step`` and is only valid for
    PhaseState (the Hamiltonian is separable in q, p)."""

    method: str = "rk45"
    rel_tol: float = 1e-10
    abs_tol: float = 1e-10
    max_step: float = math.inf

    def __post_init__(self):
        if self.method not in METHODS:
            raise InvariantError(f"method must be one of {METHODS}, got {self.method!r}")
        for name in ("rel_tol", "abs_tol"):
            value = getattr(self, name)
            if not 0 < value < 1:
                raise InvariantError(f"{name} must lie in (0, 1), got {value}")
        if not self.max_step > 0:
            raise InvariantError(f"max_step must be positive, got {self.max_step}")
        if self.method == "leapfrog" and not math.isfinite(self.max_step):
            raise InvariantError("leapfrog needs a finite max_step (its fixed step size)")


@dataclass(frozen=True)
class TrajectorySample:
    t: float
    state: State


def _qp_rhs(q: np.ndarray, p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    bonds = safe_exp(q[:-1] - q[1:], "Toda force")
    pdot = np.zeros_like(p)
    pdot[:-1] -= bonds
    pdot[1:] += bonds
    return p.copy(), pdot


def qp_vector_field(state: PhaseState) -> tuple[np.ndarray, np.ndarray]:
    """(qdot, pdot) from Hamilton's equations; no forces past the chain ends."""
    return _qp_rhs(state.q, state.p)


def _ab_rhs(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a2 = np.concatenate(([0.0], a * a, [0.0]))
    return a * (b[1:] - b[:-1]), 2.0 * (a2[1:] - a2[:-1])


def ab_vector_field(state: FlaschkaState) -> tuple[np.ndarray, np.ndarray]:
    """(adot, bdot) with the boundary convention a_0 = a_N = 0."""
    return _ab_rhs(state.a, state.b)


def lax_commutator(state: FlaschkaState) -> np.ndarray:
    """[B, L] = B L - L B."""
    L = jacobi_matrix(state).matrix
    B = lax_b_matrix(state)
    return B @ L - L @ B


def _check_times(t_end: float, sample_times) -> np.ndarray:
    if not (math.isfinite(t_end) and t_end >= 0):
        raise InvariantError(f"t_end must be finite and non-negative, got {t_end}")
    times = np.array([t_end] if sample_times is None else sample_times, dtype=float).reshape(-1)
    if times.size == 0:
        raise InvariantError("no sample times requested")
    if np.any(np.diff(times) < 0):
        raise InvariantError("sample_times must be sorted")
    if times[0] < 0 or times[-1] > t_end:
        raise InvariantError(f"sample_times must lie in [0, {t_end}]")
    return times


def _leapfrog(state: PhaseState, times: np.ndarray, step: float) -> list[TrajectorySample]:
    q, p = state.q.copy(), state.p.copy()
    t = 0.0
    out = []
    force = _qp_rhs(q, p)[1]
    for target in times:
        span = target - t
        if span > 0:
            m = math.ceil(span / step - 1e-12)
            h = span / m
            for _ in range(m):
                p += 0.5 * h * force
                q += h * p
                force = _qp_rhs(q, p)[1]
                p += 0.5 * h * force
            t = target
        out.append(TrajectorySample(float(target), PhaseState(q, p)))
    return out


def _solve(rhs, y0: np.ndarray, times: np.ndarray, config: IntegratorConfig):
    if times[-1] == 0:
        return np.repeat(y0[:, None], times.size, axis=1)
    sol = solve_ivp(rhs, (0.0, float(times[-1])), y0, method="RK45", t_eval=times,
                    rtol=config.rel_tol, atol=config.abs_tol, max_step=config.max_step)
    if sol.status != 0:
        reached = float(sol.t[-1]) if sol.t.size else 0.0
        raise IntegrationError(f"integration failed: {sol.message}", reached)
    return sol.y


def integrate(initial: State, t_end: float, sample_times=None,
              config: IntegratorConfig | None = None) -> list[TrajectorySample]:
    """Trajectory samples at ``sample_times`` (default: just ``t_end``).

    SpectralPoint initial data is advanced with the closed-form flow; the
    other charts are integrated numerically.
    """
    config = config or IntegratorConfig()
    times = _check_times(t_end, sample_times)

    if isinstance(initial, SpectralPoint):
        return [TrajectorySample(float(t), spectral_flow(initial, t)) for t in times]
    if config.method == "leapfrog":
        if not isinstance(initial, PhaseState):
            raise InvariantError("leapfrog integration is only valid for PhaseState")
        return _leapfrog(initial, times, config.max_step)

    if isinstance(initial, PhaseState):
        n = initial.n

        def rhs(_t, y):
            return np.concatenate(_qp_rhs(y[:n], y[n:]))

        ys = _solve(rhs, np.concatenate((initial.q, initial.p)), times, config)
        return [TrajectorySample(float(t), PhaseState(y[:n], y[n:])) for t, y in zip(times, ys.T)]

    if isinstance(initial, FlaschkaState):
        # Integrate ln a: positivity is automatic and tolerances stay relative
        # once a_i decays far below abs_tol.
        m = initial.n - 1

        def rhs(_t, y):
            a = np.exp(y[:m])
            adot, bdot = _ab_rhs(a, y[m:])
            return np.concatenate((adot / a, bdot))

        ys = _solve(rhs, np.concatenate((np.log(initial.a), initial.b)), times, config)
        out = []
        for t, y in zip(times, ys.T):
            a = np.exp(y[:m])
            if np.any(a <= 0):
                raise IntegrationError("off-diagonal a_i underflowed to zero", float(t))
            out.append(TrajectorySample(float(t), FlaschkaState(a, y[m:])))
        return out

    raise TypeError(f"cannot integrate {type(initial).__name__}")
