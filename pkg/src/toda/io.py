"""JSON state documents and CSV trajectories.

A state document holds exactly one chart::

    {"n": 2, "q": [...], "p": [...]}            canonical
    {"n": 2, "a": [...], "b": [...], "q_sum": 0} Flaschka
    {"n": 2, "lambda": [...], "r": [...]}        spectral

``q_sum`` (default 0) fixes the free translation when a document is mapped
back to positions, and selects the canonical residue lift.
"""
from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Union

from .core import FlaschkaState, PhaseState, SpectralPoint
from .errors import InvariantError

State = Union[PhaseState, FlaschkaState, SpectralPoint]

CHARTS = {("q", "p"): PhaseState, ("a", "b"): FlaschkaState, ("lambda", "r"): SpectralPoint}


def _vector(doc: dict, key: str) -> list[float]:
    values = doc[key]
    if not isinstance(values, list) or not all(isinstance(v, (int, float)) for v in values):
        raise InvariantError(f"'{key}' must be a list of numbers")
    if not all(math.isfinite(v) for v in values):
        raise InvariantError(f"'{key}' contains non-finite values")
    return [float(v) for v in values]


def state_from_document(doc: dict) -> tuple[State, float]:
    if not isinstance(doc, dict):
        raise InvariantError("state document must be a JSON object")
    present = [keys for keys in CHARTS if any(k in doc for k in keys)]
    if len(present) != 1 or not all(k in doc for k in present[0]):
        raise InvariantError("document must contain exactly one of {q,p}, {a,b}, {lambda,r}")
    x_key, y_key = present[0]
    x, y = _vector(doc, x_key), _vector(doc, y_key)
    n = doc.get("n", len(y))
    if not isinstance(n, int) or n != len(y):
        raise InvariantError(f"n = {n!r} is inconsistent with len({y_key}) = {len(y)}")
    q_sum = doc.get("q_sum", 0.0)
    if not isinstance(q_sum, (int, float)) or not math.isfinite(q_sum):
        raise InvariantError("q_sum must be a finite number")
    return CHARTS[present[0]](x, y), float(q_sum)


def state_to_document(state: State, q_sum: float | None = None) -> dict:
    if isinstance(state, PhaseState):
        doc = {"n": state.n, "q": state.q.tolist(), "p": state.p.tolist()}
    elif isinstance(state, FlaschkaState):
        doc = {"n": state.n, "a": state.a.tolist(), "b": state.b.tolist()}
    else:
        doc = {"n": state.n, "lambda": state.lam.tolist(), "r": state.r.tolist()}
    if q_sum is not None:
        doc["q_sum"] = float(q_sum)
    return doc


def load_state(path: Union[str, Path]) -> tuple[State, float]:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InvariantError(f"cannot read state document {path}: {exc}") from exc
    return state_from_document(doc)


def save_state(path: Union[str, Path], state: State, q_sum: float | None = None) -> None:
    # json writes floats with repr(), the shortest string that round-trips.
    Path(path).write_text(json.dumps(state_to_document(state, q_sum), indent=2) + "\n")


def chart_columns(state: State) -> list[str]:
    n = state.n
    if isinstance(state, PhaseState):
        return [f"q{i}" for i in range(1, n + 1)] + [f"p{i}" for i in range(1, n + 1)]
    if isinstance(state, FlaschkaState):
        return [f"a{i}" for i in range(1, n)] + [f"b{i}" for i in range(1, n + 1)]
    return [f"lambda{i}" for i in range(1, n + 1)] + [f"r{i}" for i in range(1, n + 1)]


def chart_values(state: State) -> list[float]:
    if isinstance(state, PhaseState):
        return [*state.q, *state.p]
    if isinstance(state, FlaschkaState):
        return [*state.a, *state.b]
    return [*state.lam, *state.r]


def format_float(x: float) -> str:
    """17 significant digits: enough to round-trip any double."""
    return "" if x is None or math.isnan(x) else f"{x:.17g}"
