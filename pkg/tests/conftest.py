import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from jmopt.poly import Polynomial

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@st.composite
def polynomials(draw, nvars=None, max_degree=4, max_terms=6):
    n = draw(st.integers(1, 4)) if nvars is None else nvars
    nterms = draw(st.integers(0, max_terms))
    terms = {}
    for _ in range(nterms):
        deg = draw(st.integers(0, max_degree))
        exps = [0] * n
        for _ in range(deg):
            exps[draw(st.integers(0, n - 1))] += 1
        terms[tuple(exps)] = draw(st.floats(-3, 3, allow_nan=False, allow_infinity=False))
    return Polynomial(n, terms)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list[str] = []


def record_criterion(number: int, ok: bool, detail: str) -> str:
    """Print and keep one pass/fail line for an acceptance criterion."""
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
