import pytest
from hypothesis import HealthCheck, settings

from exovortex.geometry import CurveSpec, build_curve

settings.register_profile("default", max_examples=30, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# PASS/FAIL lines from the acceptance suite, repeated in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def disk():
    return build_curve(CurveSpec.circle(1.0))


@pytest.fixture(scope="session")
def ellipse():
    return build_curve(CurveSpec.ellipse(2.0, 1.0))


@pytest.fixture(scope="session")
def nonconvex():
    return build_curve(CurveSpec.fourier(1.0, [0.0, 0.35]))
