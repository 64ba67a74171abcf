import numpy as np
import pytest

from sixwire import basis, fields
from sixwire.geometry import default_layout

MEASURED_MEAN_F = 3.135e6  # untilted mean radial frequency the rf amplitude is fitted to


@pytest.fixture(scope="session")
def layout():
    return default_layout()


@pytest.fixture(scope="session")
def op175(layout):
    return fields.OperatingPoint(layout, V_rf=175.0)


@pytest.fixture(scope="session")
def null(op175):
    return fields.find_rf_null(op175)


@pytest.fixture(scope="session")
def sets(layout, null):
    return basis.solve_all_bases(layout, null)


@pytest.fixture(scope="session")
def fitted_op(op175, sets):
    """Endcap applied, rf amplitude fitted to the measured untilted frequency."""
    op = op175.replace(dc_voltages=basis.dc_voltages(sets, endcap=1.0))
    return op.replace(V_rf=basis.infer_rf_amplitude(MEASURED_MEAN_F, op))


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


REPORT_KEY = pytest.StashKey[list]()


@pytest.fixture
def report(request):
    """Record and print one PASS/FAIL line; the lines are repeated in the terminal summary."""
    lines = request.config.stash.setdefault(REPORT_KEY, [])

    def _report(label, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} {label}: {detail}"
        print(line)
        lines.append(line)
        return ok

    return _report


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(REPORT_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
