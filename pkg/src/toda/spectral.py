"""Direct spectral transform of a Jacobi matrix and the Weyl function.

The Weyl function is ``f(lam) = ((lam I - L)^{-1})_{NN}``. It is evaluated
three independent ways (resolvent solve, continued fraction, partial
fractions over the spectrum) so that each can serve as an oracle for the
others.
"""
from __future__ import annotations

import math

import mpmath
import numpy as np
from scipy.linalg import LinAlgError, eigh_tridiagonal

from .core import (
    EXP_MAX,
    EXP_MIN,
    FlaschkaState,
    JacobiMatrix,
    SpectralPoint,
    jacobi_matrix,
)
from .errors import NumericalError, PoleProximityError, RangeError

POLE_EXCLUSION = 1e-9
MIN_EIGEN_GAP = 1e-13
MAX_RESOLVENT_COND = 1e12
DEFLATION_GUARD = 1e-8


def _eigh_mp(diag: np.ndarray, offdiag: np.ndarray, scale: float) -> tuple[np.ndarray, np.ndarray]:
    # Enough bits that the smallest coupling sits far above the deflation threshold.
    smallest = float(np.min(offdiag)) / scale
    ctx = mpmath.MPContext()
    ctx.prec = 64 + 2 * int(math.ceil(-math.log2(smallest)))
    n = diag.size
    M = ctx.matrix(n, n)
    for i in range(n):
        M[i, i] = ctx.mpf(float(diag[i]))
    for i in range(n - 1):
        M[i, i + 1] = M[i + 1, i] = ctx.mpf(float(offdiag[i]))
    E, Q = ctx.eigsy(M)
    lam = np.array([float(e) for e in E])
    V = np.array([[float(Q[i, j]) for j in range(n)] for i in range(n)])
    order = np.argsort(lam)
    return lam[order], V[:, order]


def eigen_decompose(L: JacobiMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and orthonormal eigenvectors of ``L``.

    Column ``V[:, i]`` belongs to ``lam[i]`` and has positive last component.
    Implicit QL (LAPACK ``stev``) keeps tiny last components accurate to
    working precision relative to themselves, which the extra integrals need
    once particles separate; the MRRR driver can flush them to zero. Below
    ``DEFLATION_GUARD`` relative coupling LAPACK deflates, so those matrices
    go through mpmath at a precision matched to the smallest coupling.
    """
    scale = max(float(np.max(np.abs(L.diag))), float(np.max(L.offdiag, initial=0.0)), 1.0)
    if L.offdiag.size and np.min(L.offdiag) < DEFLATION_GUARD * scale:
        lam, V = _eigh_mp(L.diag, L.offdiag, scale)
    else:
        try:
            lam, V = eigh_tridiagonal(L.diag, L.offdiag, lapack_driver="stev")
        except LinAlgError as exc:
            raise NumericalError(f"tridiagonal eigensolver failed: {exc}") from exc
    lam, V = lam[::-1].copy(), V[:, ::-1].copy()
    gaps = -np.diff(lam)
    if gaps.size and gaps.min() < MIN_EIGEN_GAP:
        raise NumericalError(
            f"eigenvalue collision (gap {gaps.min():.3e}); impossible for a valid Jacobi matrix"
        )
    V *= np.where(V[-1] < 0, -1.0, 1.0)
    return lam, V


def moser_map(state: FlaschkaState) -> SpectralPoint:
    """(a, b) -> (lam, r) in the unit gauge sum(r^2) = 1."""
    lam, V = eigen_decompose(jacobi_matrix(state))
    rho = V[-1] ** 2
    if np.any(rho <= 0):
        raise NumericalError("a last eigenvector component vanished numerically")
    rho = rho / rho.sum()
    return SpectralPoint(lam, np.sqrt(rho))


def normalize(point: SpectralPoint) -> SpectralPoint:
    """Same point in the unit gauge sum(r^2) = 1."""
    return SpectralPoint(point.lam, np.sqrt(point.rho))


def canonical_lift(point: SpectralPoint, q_sum: float = 0.0) -> SpectralPoint:
    """Rescale ``r`` so that prod(r) = exp(q_sum / 2).

    Along the flow d/dt sum(q) = -2 sum(lam) = d/dt (2 ln prod r), so this
    gauge follows the dynamics and makes the extra integrals conserved.
    """
    log_alpha = (0.5 * q_sum - point.log_prod_r) / point.n
    log_r = np.log(point.r) + log_alpha
    if np.any(log_r > EXP_MAX) or np.any(log_r < EXP_MIN):
        raise RangeError("canonical lift leaves the double range")
    return SpectralPoint(point.lam, np.exp(log_r))


def spectral_flow(point: SpectralPoint, t: float) -> SpectralPoint:
    """Exact flow: lam fixed, r_i(t) = r_i exp(-lam_i t). No renormalization."""
    log_r = np.log(point.r) - point.lam * t
    if np.any(log_r > EXP_MAX) or np.any(log_r < EXP_MIN):
        raise RangeError(f"spectral flow to t = {t} leaves the double range")
    return SpectralPoint(point.lam, np.exp(log_r))


def weyl_partial_fraction(point: SpectralPoint, lam: float,
                          exclusion: float = POLE_EXCLUSION) -> float:
    dist = lam - point.lam
    if np.min(np.abs(dist)) <= exclusion:
        raise PoleProximityError(f"lam = {lam} is within {exclusion} of an eigenvalue")
    return float(np.sum(point.rho / dist))


def weyl_continued_fraction(state: FlaschkaState, lam: float, tiny: float = 1e-12) -> float:
    """Evaluate 1/(lam - b_N - a_{N-1}^2/(lam - b_{N-1} - ...)) from the b_1 end."""
    a2 = state.a ** 2
    d = lam - state.b[0]
    for k in range(1, state.n):
        if abs(d) < tiny:
            raise PoleProximityError(f"continued fraction denominator {d:.3e} at depth {k}")
        d = lam - state.b[k] - a2[k - 1] / d
    if abs(d) < tiny:
        raise PoleProximityError(f"continued fraction denominator {d:.3e} at depth {state.n}")
    return 1.0 / d


def weyl_resolvent(state: FlaschkaState, lam: float) -> float:
    """(N, N) entry of (lam I - L)^{-1} via a linear solve against e_N."""
    M = lam * np.eye(state.n) - jacobi_matrix(state).matrix
    cond = np.linalg.cond(M)
    if not np.isfinite(cond) or cond > MAX_RESOLVENT_COND:
        raise PoleProximityError(f"resolvent is ill-conditioned at lam = {lam} (cond {cond:.3e})")
    e_n = np.zeros(state.n)
    e_n[-1] = 1.0
    return float(np.linalg.solve(M, e_n)[-1])
