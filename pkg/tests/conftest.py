from fractions import Fraction

import pytest
from hypothesis import settings, strategies as st

from jackstein.partitions import Partition

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

ALPHA_GRID = [Fraction(1), Fraction(2), Fraction(1, 2), Fraction(5, 3)]

@st.composite
def partitions(draw, max_n=12):
    n = draw(st.integers(min_value=0, max_value=max_n))
    parts = []
    left, cap = n, n
    while left:
        p = draw(st.integers(min_value=1, max_value=min(left, cap)))
        parts.append(p)
        left -= p
        cap = p
    return Partition(tuple(parts))


alphas = st.builds(
    Fraction,
    st.integers(min_value=1, max_value=12),
    st.integers(min_value=1, max_value=12),
)


@pytest.fixture(autouse=True)
def _manifest_in_tmp(tmp_path, monkeypatch):
    monkeypatch.setenv("JACKSTEIN_MANIFEST", str(tmp_path / "manifest.jsonl"))


ACCEPTANCE_LINES: dict[int, list[tuple[bool, str]]] = {}


def record_criterion(number: int, ok: bool, detail: str) -> None:
    ACCEPTANCE_LINES.setdefault(number, []).append((bool(ok), detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        parts = ACCEPTANCE_LINES[number]
        verdict = "PASS" if all(ok for ok, _ in parts) else "FAIL"
        terminalreporter.write_line(f"criterion {number:2d}: {verdict}  " + "; ".join(d for _, d in parts))
