import numpy as np
import pytest

from toda.core import FlaschkaState, PhaseState, SpectralPoint

_CRITERIA: dict[int, tuple[str, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        verdict, detail = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:2d}: {verdict}  {detail}")


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line per acceptance criterion, then assert."""
    def record(number: int, ok: bool, detail: str) -> None:
        verdict = "PASS" if ok else "FAIL"
        _CRITERIA[number] = (verdict, detail)
        print(f"criterion {number:2d}: {verdict}  {detail}")
        assert ok, detail
    return record


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# Worked two-particle point: lam = (3, 1), unit residues.
@pytest.fixture
def p0():
    return PhaseState([np.log(2.0), -np.log(2.0)], [-4.0, -4.0])


@pytest.fixture
def f0():
    return FlaschkaState([1.0], [2.0, 2.0])


@pytest.fixture
def s0():
    return SpectralPoint([3.0, 1.0], [1.0, 1.0])
