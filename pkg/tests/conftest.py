import pytest

from cbim.assignment import AssignmentEngine, BorrowPolicy
from cbim.geometry import build_cluster
from cbim.propagation import RadioEnvironment
from cbim.spectrum import init_spectrum


@pytest.fixture
def env():
    return RadioEnvironment()


@pytest.fixture
def layout():
    return build_cluster(1.0, 2)


@pytest.fixture
def cluster():
    return build_cluster(1.0, 1)


def make_engine(channels=4, a_th=2, b_th=2, donors_per_group=1, tiers=1):
    layout = build_cluster(1.0, tiers)
    plan = init_spectrum([c.id for c in layout.cells if c.tier <= 1], channels)
    policy = BorrowPolicy(a_th, b_th, donors_per_group=donors_per_group)
    return AssignmentEngine(plan, layout, policy)


@pytest.fixture
def small_engine():
    return make_engine()


_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line per acceptance criterion, then assert."""
    def check(number, title, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title}"
        if detail:
            line += f" ({detail})"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line
    return check


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
