import pytest

from lipgraph import PointCloud, SeedSpec, generate_uniform

ACCEPTANCE_RESULTS = []


@pytest.fixture
def acceptance_log():
    """Record one pass/fail line per acceptance criterion for the terminal summary."""
    def record(criterion, ok, detail):
        ACCEPTANCE_RESULTS.append((criterion, bool(ok), detail))
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, ok, detail in sorted(ACCEPTANCE_RESULTS, key=lambda r: r[0]):
        terminalreporter.write_line(f"{criterion:<5} {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def three_points():
    return PointCloud([(0.0, 0.0), (0.5, 0.6), (1.0, 0.2)])


def random_cloud(n, seed, stream=0):
    return generate_uniform(n, SeedSpec(seed, stream))
