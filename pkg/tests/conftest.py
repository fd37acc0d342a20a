"""Shared strategies and the acceptance summary printed at the end of a run."""
from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from zorich.perm import Alphabet, Permutation, is_irreducible

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


@st.composite
def irreducible_perms(draw, min_d: int = 2, max_d: int = 6) -> Permutation:
    d = draw(st.integers(min_d, max_d))
    alpha = Alphabet.of_size(d)
    top = draw(st.permutations(alpha.letters))
    bottom = draw(st.permutations(alpha.letters).filter(
        lambda b: is_irreducible(Permutation(tuple(top), tuple(b), alpha))))
    return Permutation(tuple(top), tuple(bottom), alpha)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def acceptance_line():
    def record(number: int, title: str, ok: bool, detail: str = "") -> None:
        line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}"
        if detail:
            line += f"  ({detail})"
        ACCEPTANCE_LINES.append(line)
        print(line)
    return record
