"""Finite-difference Poisson brackets.

Canonical bracket on (q, p):

    {f, g} = sum_k df/dq_k dg/dp_k - df/dp_k dg/dq_k

k-th bracket on (lam, r), with structure {lam_i, r_j} = delta_ij lam_i^k r_j:

    {f, g}_k = sum_i lam_i^k r_i (df/dlam_i dg/dr_i - df/dr_i dg/dlam_i)

k = 0 is the linear bracket (under which H_2 = sum(lam^2)/2 generates
r_i' = -lam_i r_i, i.e. f' = {f, H_2}), k = 1 the quadratic one.

Observables take two flat arrays (x, y) = (q, p) or (lam, r). Spectral
observables are evaluated on raw arrays, so stencil points are not
re-validated as SpectralPoints.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from .core import PhaseState, SpectralPoint, flaschka_forward, hamiltonian
from .errors import InvariantError, NumericalError
from .integrals import extra_integrals, phase_lift

STRUCTURES = ("canonical", "linear", "quadratic", "kth")


@dataclass(frozen=True)
class ScalarObservable:
    name: str
    fn: Callable[[np.ndarray, np.ndarray], float]

    def __call__(self, x, y) -> float:
        return float(self.fn(np.asarray(x, dtype=float), np.asarray(y, dtype=float)))

    def __mul__(self, other: "ScalarObservable") -> "ScalarObservable":
        return ScalarObservable(f"({self.name})*({other.name})",
                                lambda x, y: self(x, y) * other(x, y))


@dataclass(frozen=True)
class BracketConfig:
    fd_step_scale: float = 1e-5
    structure: str = "canonical"
    k: int = 0

    def __post_init__(self):
        if not 0 < self.fd_step_scale < 1e-2:
            raise InvariantError(f"fd_step_scale must lie in (0, 1e-2), got {self.fd_step_scale}")
        if self.structure not in STRUCTURES:
            raise InvariantError(f"structure must be one of {STRUCTURES}")

    @property
    def power(self) -> int:
        """Exponent k of the (lam, r) structure."""
        return {"linear": 0, "quadratic": 1}.get(self.structure, self.k)


def _coords(at) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(at, PhaseState):
        return at.q, at.p
    if isinstance(at, SpectralPoint):
        return at.lam, at.r
    x, y = at
    return np.asarray(x, dtype=float), np.asarray(y, dtype=float)


def gradient(f: ScalarObservable, x: np.ndarray, y: np.ndarray,
             step_scale: float) -> tuple[np.ndarray, np.ndarray]:
    """Central-difference gradient with step step_scale * max(1, |x_k|)."""
    z0 = np.concatenate((x, y))
    n = x.size
    grad = np.empty_like(z0)
    for k in range(z0.size):
        h = step_scale * max(1.0, abs(z0[k]))
        zp, zm = z0.copy(), z0.copy()
        zp[k] += h
        zm[k] -= h
        fp, fm = f(zp[:n], zp[n:]), f(zm[:n], zm[n:])
        if not (np.isfinite(fp) and np.isfinite(fm)):
            raise NumericalError(f"{f.name} is not finite on the stencil (coordinate {k})")
        grad[k] = (fp - fm) / (2.0 * h)
    return grad[:n], grad[n:]


def _structure_weights(cfg: BracketConfig, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    if cfg.structure == "canonical":
        return np.ones_like(x)
    return x ** cfg.power * y


def _matrix(grads: list, weights: np.ndarray) -> np.ndarray:
    gx = np.array([g[0] for g in grads])
    gy = np.array([g[1] for g in grads])
    return (gx * weights) @ gy.T - (gy * weights) @ gx.T


def canonical_bracket(f: ScalarObservable, g: ScalarObservable, at: PhaseState,
                      cfg: BracketConfig | None = None) -> float:
    cfg = cfg or BracketConfig()
    x, y = _coords(at)
    m = _matrix([gradient(f, x, y, cfg.fd_step_scale), gradient(g, x, y, cfg.fd_step_scale)],
                np.ones_like(x))
    return float(m[0, 1])


def lambda_r_bracket(f: ScalarObservable, g: ScalarObservable,
                     at: Union[SpectralPoint, tuple], k: int = 0,
                     cfg: BracketConfig | None = None) -> float:
    step = (cfg or BracketConfig()).fd_step_scale
    x, y = _coords(at)
    m = _matrix([gradient(f, x, y, step), gradient(g, x, y, step)], x ** k * y)
    return float(m[0, 1])


def bracket(f: ScalarObservable, g: ScalarObservable, at, cfg: BracketConfig) -> float:
    if cfg.structure == "canonical":
        return canonical_bracket(f, g, at, cfg)
    return lambda_r_bracket(f, g, at, cfg.power, cfg)


def involution_matrix(fs: Sequence[ScalarObservable], at,
                      cfg: BracketConfig | None = None,
                      scaled: bool = False) -> tuple[np.ndarray, float]:
    """Pairwise brackets {f_a, f_b} and the largest absolute entry.

    With ``scaled`` the reported maximum is |{f_a, f_b}| / (|grad f_a| |grad f_b|),
    gradients weighted by sqrt|structure|, which is invariant under rescaling
    any f_a; useful when the family mixes O(1) and O(1e6) functions.
    """
    cfg = cfg or BracketConfig()
    x, y = _coords(at)
    grads = [gradient(f, x, y, cfg.fd_step_scale) for f in fs]
    w = _structure_weights(cfg, x, y)
    m = _matrix(grads, w)
    if not scaled:
        return m, float(np.max(np.abs(m)))
    root = np.sqrt(np.abs(w))
    norms = np.array([np.linalg.norm(np.concatenate((gx * root, gy * root))) for gx, gy in grads])
    norms = np.where(norms > 0, norms, 1.0)
    return m, float(np.max(np.abs(m) / np.outer(norms, norms)))


# ---------------------------------------------------------------------------
# Named observables

def coordinate(which: str, i: int) -> ScalarObservable:
    """i-th (0-based) entry of the first ('x') or second ('y') coordinate block."""
    if which == "x":
        return ScalarObservable(f"x[{i}]", lambda x, y: x[i])
    return ScalarObservable(f"y[{i}]", lambda x, y: y[i])


def power_sum_obs(k: int, normalized: bool = False) -> ScalarObservable:
    """sum lam^k, or (1/k) sum lam^k when ``normalized``."""
    c = 1.0 / k if normalized else 1.0
    name = f"H{k}/{k}" if normalized else f"H{k}"
    return ScalarObservable(name, lambda lam, r: c * np.sum(lam ** k))


def spectral_hamiltonian_obs() -> ScalarObservable:
    return ScalarObservable("H2/2", lambda lam, r: 0.5 * np.sum(lam ** 2))


def extra_integral_obs(j: int, flipped_sign: bool = False) -> ScalarObservable:
    return ScalarObservable(f"I{j}", lambda lam, r: extra_integrals((lam, r), flipped_sign)[j - 1])


def qp_hamiltonian_obs() -> ScalarObservable:
    return ScalarObservable("H", lambda q, p: hamiltonian(PhaseState(q, p)))


def time_function_obs() -> ScalarObservable:
    return ScalarObservable("G", lambda q, p: (q[0] + q[1]) / (p[0] + p[1]))


def noether_h1_obs() -> ScalarObservable:
    return ScalarObservable("H1_noether", lambda q, p: -0.5 * (p[0] + p[1]))


def noether_j1_obs() -> ScalarObservable:
    return ScalarObservable("J1_noether",
                            lambda q, p: (p[0] - p[1]) ** 2 + 4.0 * np.exp(q[0] - q[1]))


def pulled_back(obs: ScalarObservable) -> ScalarObservable:
    """Spectral observable as a function of (q, p) via the canonical lift."""
    def fn(q, p):
        point = phase_lift(PhaseState(q, p))
        return obs(point.lam, point.r)
    return ScalarObservable(f"{obs.name}(q,p)", fn)


def eigenvalue_qp(i: int) -> ScalarObservable:
    return pulled_back(ScalarObservable(f"lam{i + 1}", lambda lam, r: lam[i]))


def log_r_qp(i: int) -> ScalarObservable:
    return pulled_back(ScalarObservable(f"ln r{i + 1}", lambda lam, r: np.log(r[i])))


def s1_family(n: int, normalized: bool = False) -> list[ScalarObservable]:
    return [power_sum_obs(k, normalized) for k in range(1, n + 1)]


def s2_family(n: int) -> list[ScalarObservable]:
    return [spectral_hamiltonian_obs()] + [extra_integral_obs(j) for j in range(1, n)]


# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PullbackReport:
    lambda_log_r: np.ndarray     # {lam_i, ln(r_j / r_k)} indexed [i, j, k]
    lambda_lambda: np.ndarray    # {lam_i, lam_j}
    max_scaling_error: float
    max_lambda_bracket: float
    passed: bool


def pullback_scaling_check(at: PhaseState, tol: float = 1e-5,
                           cfg: BracketConfig | None = None) -> PullbackReport:
    """Canonical brackets through (q, p) -> (a, b) -> (lam, lifted r).

    Expect {lam_i, ln(r_j/r_k)} = (delta_ij - delta_ik) / 4 and {lam_i, lam_j} = 0;
    the 1/4 is the ratio between H = sum p^2/2 + ... and H_2 = sum lam^2 / 2.
    """
    cfg = cfg or BracketConfig()
    flaschka_forward(at)  # range check before building the stencil
    n = at.n
    lam_obs = [eigenvalue_qp(i) for i in range(n)]
    logr_obs = [log_r_qp(i) for i in range(n)]
    m, _ = involution_matrix(lam_obs + logr_obs, at, cfg)
    lam_lam = m[:n, :n]
    lam_logr = m[:n, n:]
    triple = lam_logr[:, :, None] - lam_logr[:, None, :]
    eye = np.eye(n)
    expected = 0.25 * (eye[:, :, None] - eye[:, None, :])
    scale_err = float(np.max(np.abs(triple - expected)))
    lam_err = float(np.max(np.abs(lam_lam)))
    return PullbackReport(triple, lam_lam, scale_err, lam_err,
                          scale_err < tol and lam_err < tol)
