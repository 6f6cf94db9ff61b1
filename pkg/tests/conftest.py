import pytest

from pseudoherm import model, ncmodel


@pytest.fixture(scope="session")
def ops_half():
    """Commutative model at A = B = 0.5, cutoff 30."""
    return model.build_model(model.ModelParams(0.5, 0.5, 30))


@pytest.fixture(scope="session")
def ops_03():
    return model.build_model(model.ModelParams(0.3, 0.3, 30))


@pytest.fixture(scope="session")
def ops_hermitian():
    return model.build_model(model.ModelParams(0.0, 0.0, 20))


@pytest.fixture(scope="session")
def nc_params():
    return ncmodel.NCParams(model.ModelParams(0.3, 0.3, 30), 0.01, 0.01)


@pytest.fixture(scope="session")
def nc_ops(nc_params):
    return ncmodel.build_nc_structure(nc_params)


# acceptance reporting: test_acceptance.py records one line per criterion and
# the summary hook prints them after the run
import time

ACCEPTANCE: dict[int, tuple[bool, str]] = {}
SUITE_BUDGET_S = 300.0


def pytest_sessionstart(session):
    session.config._pseudoherm_t0 = time.perf_counter()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE:
        return
    elapsed = time.perf_counter() - config._pseudoherm_t0
    failed = len(terminalreporter.stats.get("failed", [])) + len(terminalreporter.stats.get("error", []))
    if 10 in ACCEPTANCE:
        ok, detail = ACCEPTANCE[10]
        ok = ok and failed == 0 and elapsed < SUITE_BUDGET_S
        ACCEPTANCE[10] = (ok, f"{detail}; suite failures {failed}, runtime {elapsed:.0f} s (< {SUITE_BUDGET_S:.0f} s)")
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
