import time

import pytest

from tzitzeica import harness
from tzitzeica.config import default_config
from tzitzeica.scattering import InitialData, LambdaGrid, build_reflection_table

_ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def acceptance_log():
    """Collects one summary line per acceptance criterion."""
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def gaussian():
    return InitialData.gaussian()


@pytest.fixture(scope="session")
def reference(gaussian):
    """Validated reflection table of the reference datum, its samples and build time."""
    t0 = time.perf_counter()
    table, samples = build_reflection_table(gaussian, LambdaGrid(), validate=True,
                                            return_samples=True)
    return table, samples, time.perf_counter() - t0


@pytest.fixture(scope="session")
def table(reference):
    return reference[0]


@pytest.fixture(scope="session")
def comparison(gaussian, reference):
    """Reference comparison report and its runtime (table build included)."""
    cfg = default_config()
    t0 = time.perf_counter()
    report = harness.run_comparison(cfg, table=reference[0], data=gaussian)
    return report, time.perf_counter() - t0 + reference[2]
