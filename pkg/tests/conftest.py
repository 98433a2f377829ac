import pytest

from agenttemp.domain import SystemParams


def fig1_params(j: float = 0.0) -> SystemParams:
    """k = mu = B = 1 with z = 12, the characteristic-curve example."""
    return SystemParams(n_agents=100, z=12, mu=1.0, j=j, k=1.0, b=1.0)


@pytest.fixture
def ideal():
    return fig1_params(0.0)


@pytest.fixture(params=[0.0, 1.0, 2.0, 3.0], ids=lambda j: f"J={j:g}")
def fig1(request):
    return fig1_params(request.param)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion(request):
    """Record a one-line pass/fail verdict for an acceptance criterion."""

    def record(name: str, passed: bool, detail: str) -> bool:
        line = f"{'PASS' if passed else 'FAIL'}  {name}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
