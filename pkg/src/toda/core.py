"""State types for the open Toda lattice and the maps between them.

Three charts are used throughout the package:

* ``PhaseState``    canonical positions and momenta ``(q, p)``
* ``FlaschkaState`` reduced variables ``(a, b)`` of the Jacobi matrix ``L``
* ``SpectralPoint`` eigenvalues and residue lifts ``(lam, r)``

All states are immutable; their arrays are stored read-only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvariantError, RangeError

# Largest argument accepted by exp() before the result overflows a double.
EXP_MAX = math.log(np.finfo(float).max)
EXP_MIN = math.log(np.finfo(float).tiny)


def _frozen(x, name: str) -> np.ndarray:
    arr = np.array(x, dtype=float, copy=True).reshape(-1)
    if not np.all(np.isfinite(arr)):
        raise InvariantError(f"{name} contains non-finite entries")
    arr.setflags(write=False)
    return arr


def safe_exp(x, what: str = "exponential"):
    """``np.exp`` that raises :class:`RangeError` instead of returning inf."""
    x = np.asarray(x, dtype=float)
    if np.any(x > EXP_MAX):
        raise RangeError(f"{what} overflows: argument {float(np.max(x)):.6g}")
    return np.exp(x)


@dataclass(frozen=True)
class PhaseState:
    """Positions ``q`` and momenta ``p`` of ``n >= 2`` particles."""

    q: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        q = _frozen(self.q, "q")
        p = _frozen(self.p, "p")
        if q.size != p.size:
            raise InvariantError(f"len(q) = {q.size} != len(p) = {p.size}")
        if q.size < 2:
            raise InvariantError("need at least two particles")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)

    @property
    def n(self) -> int:
        return self.q.size


@dataclass(frozen=True)
class FlaschkaState:
    """Off-diagonal ``a`` (length n-1, strictly positive) and diagonal ``b``."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = _frozen(self.a, "a")
        b = _frozen(self.b, "b")
        if b.size < 2:
            raise InvariantError("need n >= 2")
        if a.size != b.size - 1:
            raise InvariantError(f"len(a) = {a.size} must be len(b) - 1 = {b.size - 1}")
        if np.any(a <= 0):
            raise InvariantError(f"off-diagonal entries must be positive, got a = {a}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def n(self) -> int:
        return self.b.size


@dataclass(frozen=True)
class JacobiMatrix:
    """Symmetric tridiagonal matrix with positive off-diagonal."""

    diag: np.ndarray
    offdiag: np.ndarray

    def __post_init__(self):
        # Reuse the FlaschkaState checks: same shape and positivity rules.
        state = FlaschkaState(self.offdiag, self.diag)
        object.__setattr__(self, "diag", state.b)
        object.__setattr__(self, "offdiag", state.a)

    @property
    def n(self) -> int:
        return self.diag.size

    @property
    def matrix(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)

    def __array__(self, dtype=None, copy=None):
        m = self.matrix
        return m if dtype is None else m.astype(dtype)


@dataclass(frozen=True)
class SpectralPoint:
    """Moser coordinates: eigenvalues ``lam`` and positive residue lifts ``r``.

    Eigenvalues are stored in strictly *descending* order, so that ``lam[i]``
    is the limit of ``b[i]`` as t -> +inf. The lift ``r`` is only defined up
    to a common positive factor; ``rho`` is the gauge-free part.
    """

    lam: np.ndarray
    r: np.ndarray

    def __post_init__(self):
        lam = _frozen(self.lam, "lam")
        r = _frozen(self.r, "r")
        if lam.size != r.size:
            raise InvariantError(f"len(lam) = {lam.size} != len(r) = {r.size}")
        if lam.size < 2:
            raise InvariantError("need n >= 2")
        if np.any(np.diff(lam) >= 0):
            raise InvariantError(f"eigenvalues must be strictly descending, got {lam}")
        if np.any(r <= 0):
            raise InvariantError(f"residue lifts must be positive, got {r}")
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "r", r)

    @property
    def n(self) -> int:
        return self.lam.size

    @property
    def rho(self) -> np.ndarray:
        """Normalized residues r_i^2 / sum r^2 (computed in log space)."""
        return normalized_weights(2.0 * np.log(self.r))

    @property
    def log_prod_r(self) -> float:
        return float(np.sum(np.log(self.r)))


def normalized_weights(log_w) -> np.ndarray:
    """exp(log_w) normalized to unit sum, robust to under/overflow."""
    log_w = np.asarray(log_w, dtype=float)
    w = np.exp(log_w - log_w.max())
    return w / w.sum()


def flaschka_forward(state: PhaseState) -> FlaschkaState:
    """a_i = exp((q_i - q_{i+1})/2) / 2,  b_i = -p_i / 2."""
    half_gap = 0.5 * (state.q[:-1] - state.q[1:])
    a = 0.5 * safe_exp(half_gap, "Flaschka a_i")
    if np.any(a == 0):
        raise RangeError("Flaschka a_i underflows to zero")
    return FlaschkaState(a, -0.5 * state.p)


def flaschka_inverse(state: FlaschkaState, q_sum: float = 0.0) -> PhaseState:
    """Section of the Flaschka projection with prescribed ``sum(q) = q_sum``."""
    gaps = 2.0 * np.log(2.0 * state.a)  # q_i - q_{i+1}
    # q_1 - q_k = sum of the first k-1 gaps; fix q_1 from the sum constraint.
    offsets = np.concatenate(([0.0], np.cumsum(gaps)))
    q1 = (q_sum + offsets.sum()) / state.n
    return PhaseState(q1 - offsets, -2.0 * state.b)


def jacobi_matrix(state: FlaschkaState) -> JacobiMatrix:
    return JacobiMatrix(state.b, state.a)


def lax_b_matrix(state: FlaschkaState) -> np.ndarray:
    """Skew tridiagonal companion: +a above the diagonal, -a below."""
    return np.diag(state.a, 1) - np.diag(state.a, -1)


def hamiltonian(state: PhaseState) -> float:
    kinetic = 0.5 * float(np.dot(state.p, state.p))
    potential = float(np.sum(safe_exp(state.q[:-1] - state.q[1:], "Toda potential")))
    return kinetic + potential
