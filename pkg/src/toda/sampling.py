"""Random test states away from the documented singular regimes."""
from __future__ import annotations

import numpy as np

from .core import FlaschkaState, SpectralPoint
from .spectral import moser_map


def random_flaschka_state(n: int, rng: np.random.Generator, min_abs_h1: float = 0.5,
                          min_gap: float = 0.05, max_tries: int = 10_000) -> FlaschkaState:
    """a ~ U[0.2, 2], b ~ U[-2, 2], rejecting |tr L| < min_abs_h1 or close eigenvalues."""
    for _ in range(max_tries):
        state = FlaschkaState(rng.uniform(0.2, 2.0, n - 1), rng.uniform(-2.0, 2.0, n))
        lam = moser_map(state).lam
        if abs(lam.sum()) >= min_abs_h1 and np.min(-np.diff(lam)) >= min_gap:
            return state
    raise RuntimeError(f"no acceptable random state for n = {n} after {max_tries} tries")


def weyl_test_points(point: SpectralPoint, count: int, rng: np.random.Generator,
                     margin: float = 0.1, pad: float = 2.0) -> np.ndarray:
    """``count`` real points within ``pad`` of the spectrum, each at least ``margin`` from it."""
    lo, hi = point.lam.min() - pad, point.lam.max() + pad
    out: list[float] = []
    while len(out) < count:
        x = rng.uniform(lo, hi)
        if np.min(np.abs(x - point.lam)) >= margin:
            out.append(x)
    return np.array(out)
