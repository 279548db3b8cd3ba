"""Inverse spectral transform: (lam, r) -> (a, b).

Two independent routes are provided:

* ``stieltjes_inverse`` applies the Hankel-determinant formulas

      a_{N-i}^2   = A_{i-1} A_{i+1} / A_i^2
      b_{N+1-i}   = A_i B_{i-2} / (A_{i-1} B_{i-1}) + A_{i-1} B_i / (A_i B_{i-1})

  where A_i, B_i are the i x i Hankel determinants of the normalized
  moments starting at c_0 and c_1.
* ``lanczos_inverse`` runs Lanczos on diag(lam) seeded with sqrt(rho).

The Hankel determinants can be evaluated either literally from the moment
sequence or from the atoms with Heine's identity

      A_i = sum_{|S|=i} prod_{k in S} rho_k prod_{k<l in S} (lam_k - lam_l)^2

(B_i carries an extra prod_{k in S} lam_k). The second form is a sum of
positive terms for A_i and stays accurate when the weights span many
orders of magnitude, which is what the flow produces at moderate t.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Any, Sequence

import mpmath
import numpy as np

from .core import FlaschkaState, SpectralPoint, normalized_weights
from .errors import DegeneratePivotError, InvariantError, NumericalError, RangeError
from .spectral import moser_map

DEFAULT_PREC_BITS = 128
PIVOT_TOL = 1e-10


def _context(precision: str, prec_bits: int):
    if precision == "double":
        return None
    if precision == "high":
        ctx = mpmath.MPContext()
        ctx.prec = prec_bits
        return ctx
    raise ValueError(f"precision must be 'double' or 'high', got {precision!r}")


def _atoms(point: SpectralPoint, ctx) -> tuple[list, list]:
    """Eigenvalues and unit-sum weights as floats or ctx.mpf."""
    if ctx is None:
        return list(point.lam), list(point.rho)
    lam = [ctx.mpf(float(x)) for x in point.lam]
    r2 = [ctx.mpf(float(x)) ** 2 for x in point.r]
    total = ctx.fsum(r2)
    return lam, [w / total for w in r2]


@dataclass(frozen=True)
class MomentSequence:
    """Normalized moments c_j = sum rho_i lam_i^j, j = 0, 1, ..."""

    c: tuple
    ctx: Any = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        c = tuple(self.c)
        if not c or abs(float(c[0]) - 1.0) > 1e-12:
            raise InvariantError("moment sequence must start with c_0 = 1")
        object.__setattr__(self, "c", c)

    def __len__(self) -> int:
        return len(self.c)

    def _det(self, rows: list[list]):
        if self.ctx is None:
            return float(np.linalg.det(np.array(rows, dtype=float)))
        return self.ctx.det(self.ctx.matrix(rows))


def moments(point: SpectralPoint, count: int | None = None, precision: str = "double",
            prec_bits: int = DEFAULT_PREC_BITS) -> MomentSequence:
    count = 2 * point.n if count is None else count
    if count < 2 * point.n:
        raise ValueError(f"need at least 2N = {2 * point.n} moments, got count = {count}")
    ctx = _context(precision, prec_bits)
    lam, rho = _atoms(point, ctx)
    if ctx is None:
        lam_a, rho_a = np.asarray(lam), np.asarray(rho)
        c = tuple(float(np.dot(rho_a, lam_a ** j)) for j in range(count))
        c = (1.0,) + c[1:]
    else:
        c = tuple(ctx.fsum(w * x ** j for w, x in zip(rho, lam)) for j in range(count))
    return MomentSequence(c, ctx)


def hankel_A(m: MomentSequence, i: int):
    """det [c_{k+l}]_{k,l<i}; A_0 = 1."""
    if i < 0:
        raise ValueError("A_i is defined for i >= 0")
    if i == 0:
        return 1.0 if m.ctx is None else m.ctx.mpf(1)
    if len(m) < 2 * i - 1:
        raise ValueError(f"A_{i} needs {2 * i - 1} moments, have {len(m)}")
    return m._det([[m.c[k + l] for l in range(i)] for k in range(i)])


def hankel_B(m: MomentSequence, i: int):
    """det [c_{k+l+1}]_{k,l<i}; B_0 = 1, B_{-1} = 0."""
    one = 1.0 if m.ctx is None else m.ctx.mpf(1)
    if i == -1:
        return 0 * one
    if i == 0:
        return one
    if i < -1:
        raise ValueError("B_i is defined for i >= -1")
    if len(m) < 2 * i:
        raise ValueError(f"B_{i} needs {2 * i} moments, have {len(m)}")
    return m._det([[m.c[k + l + 1] for l in range(i)] for k in range(i)])


def heine_determinant(point: SpectralPoint, i: int, shifted: bool = False,
                      precision: str = "double", prec_bits: int = DEFAULT_PREC_BITS):
    """A_i (or B_i when ``shifted``) evaluated from the atoms, not the moments."""
    return _heine(*_atoms(point, _context(precision, prec_bits)), i, shifted)


def _heine(lam: Sequence, rho: Sequence, i: int, shifted: bool):
    one = rho[0] / rho[0]
    if shifted and i == -1:
        return 0 * one
    if i == 0:
        return one
    total = 0 * one
    for subset in combinations(range(len(lam)), i):
        term = one
        for k in subset:
            term *= rho[k] * lam[k] if shifted else rho[k]
        for k, l in combinations(subset, 2):
            term *= (lam[k] - lam[l]) ** 2
        total += term
    return total


def stieltjes_inverse(point: SpectralPoint, precision: str = "double",
                      evaluation: str = "atoms", prec_bits: int = DEFAULT_PREC_BITS,
                      pivot_tol: float = PIVOT_TOL) -> FlaschkaState:
    """Reconstruct (a, b) from (lam, r) with the Hankel-determinant formulas.

    ``evaluation="moments"`` forms c_0..c_{2N-1} and takes determinants of
    the Hankel matrices directly; ``"atoms"`` (default) uses Heine's identity
    for the same determinants. ``precision="high"`` runs either in mpmath at
    ``prec_bits`` bits.

    Raises DegeneratePivotError when some B_k (k < N) used as a divisor is
    zero relative to A_k * max|lam|^k; this is a removable singularity of
    the formulas (e.g. trace-free N = 2 states) and lanczos_inverse covers it.
    """
    n = point.n
    ctx = _context(precision, prec_bits)
    if evaluation == "atoms":
        lam, rho = _atoms(point, ctx)
        A = [_heine(lam, rho, i, False) for i in range(n + 1)]
        B = {i: _heine(lam, rho, i, True) for i in range(-1, n + 1)}
    elif evaluation == "moments":
        m = moments(point, 2 * n, precision, prec_bits)
        A = [hankel_A(m, i) for i in range(n + 1)]
        B = {i: hankel_B(m, i) for i in range(-1, n + 1)}
    else:
        raise ValueError(f"evaluation must be 'atoms' or 'moments', got {evaluation!r}")

    scale = float(np.max(np.abs(point.lam)))
    for k in range(1, n + 1):
        if not A[k] > 0:
            raise NumericalError(f"Hankel determinant A_{k} = {float(A[k]):.3e} is not positive")
    for k in range(1, n):
        if abs(float(B[k])) <= pivot_tol * float(A[k]) * scale ** k:
            raise DegeneratePivotError(f"B_{k}", float(B[k]))

    a = np.empty(n - 1)
    for i in range(1, n):
        a2 = A[i - 1] * A[i + 1] / A[i] ** 2
        if not a2 > 0:
            raise NumericalError(f"computed a_{n - i}^2 = {float(a2):.3e} is not positive")
        a[n - i - 1] = float(a2) ** 0.5 if ctx is None else float(ctx.sqrt(a2))
    b = np.empty(n)
    for i in range(1, n + 1):
        value = A[i] * B[i - 2] / (A[i - 1] * B[i - 1]) + A[i - 1] * B[i] / (A[i] * B[i - 1])
        b[n - i] = float(value)
    return FlaschkaState(a, b)


def n2_closed_form(point: SpectralPoint) -> FlaschkaState:
    """Two-particle inverse map written out explicitly."""
    if point.n != 2:
        raise ValueError(f"n2_closed_form needs n = 2, got n = {point.n}")
    (l1, l2), (w1, w2) = point.lam, point.rho
    a1 = np.sqrt(w1 * w2) * abs(l2 - l1)
    return FlaschkaState([a1], [w1 * l2 + w2 * l1, w1 * l1 + w2 * l2])


def lanczos_inverse(point: SpectralPoint, orth_tol: float = 1e-8) -> FlaschkaState:
    """Jacobi matrix with spectrum ``lam`` and weights ``rho`` at e_N.

    Lanczos on diag(lam) started from sqrt(rho) gives T with weights rho at
    e_1; reversing the index order moves them to e_N. Full
    reorthogonalization (two passes of classical Gram-Schmidt) is applied.
    """
    lam = point.lam
    n = point.n
    Q = np.zeros((n, n))
    Q[:, 0] = np.sqrt(point.rho)
    Q[:, 0] /= np.linalg.norm(Q[:, 0])
    alpha = np.zeros(n)
    beta = np.zeros(n - 1)
    for k in range(n):
        z = lam * Q[:, k]
        alpha[k] = Q[:, k] @ z
        if k == n - 1:
            break
        z -= alpha[k] * Q[:, k]
        if k:
            z -= beta[k - 1] * Q[:, k - 1]
        for _ in range(2):
            z -= Q[:, : k + 1] @ (Q[:, : k + 1].T @ z)
        beta[k] = np.linalg.norm(z)
        if beta[k] == 0:
            raise NumericalError(f"Lanczos breakdown at step {k + 1}: Krylov space exhausted")
        Q[:, k + 1] = z / beta[k]
    loss = np.max(np.abs(Q.T @ Q - np.eye(n)))
    if loss > orth_tol:
        raise NumericalError(f"Lanczos lost orthogonality ({loss:.3e} > {orth_tol:.1e})")
    return FlaschkaState(beta[::-1], alpha[::-1])


def exact_solution(initial: FlaschkaState, t: float, method: str = "lanczos",
                   precision: str = "double", evaluation: str = "atoms") -> FlaschkaState:
    """(a, b) at time t: direct map, exact spectral flow, inverse map.

    The flowed weights are normalized in log space, so only the ratios
    rho_i(t) / rho_max(t) need to be representable.
    """
    point = moser_map(initial)
    rho = normalized_weights(2.0 * np.log(point.r) - 2.0 * point.lam * t)
    if np.any(rho == 0):
        raise RangeError(f"flowed residues underflow at t = {t}")
    flowed = SpectralPoint(point.lam, np.sqrt(rho))
    if method == "lanczos":
        return lanczos_inverse(flowed)
    if method == "hankel":
        return stieltjes_inverse(flowed, precision=precision, evaluation=evaluation)
    raise ValueError(f"method must be 'lanczos' or 'hankel', got {method!r}")
