import glob
import os
from pathlib import Path

import numpy as np
import pytest

from co2forecast import _pykernels
from co2forecast.ingest import read_series_csv

DATA = Path(__file__).parent / "data"
PROXY_SERIES = DATA / "canada_cdiac_1960_2012.csv"
WB_FIXTURE = DATA / "wb_fixture.csv"

try:
    from co2forecast import _ckernels
except ImportError:  # extension not built
    _ckernels = None

BACKENDS = [pytest.param(_pykernels, id="python")]
if _ckernels is not None:
    BACKENDS.append(pytest.param(_ckernels, id="cython"))


def official_csv_path():
    """Location of the official EN.ATM.CO2E.PC download, or None."""
    env = os.environ.get("CO2FORECAST_WB_CSV")
    if env:
        return Path(env)
    hits = sorted(glob.glob(str(DATA / "API_EN.ATM.CO2E.PC_DS2_*.csv")))
    return Path(hits[-1]) if hits else None


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


@pytest.fixture(scope="session")
def proxy_series():
    return read_series_csv(PROXY_SERIES.read_bytes(), country_code="CAN",
                           country_name="Canada", indicator_code="EN.ATM.CO2E.PC")


@pytest.fixture(scope="session")
def proxy_dataset(proxy_series):
    return proxy_series.to_dataset()


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


# --- acceptance reporting: one line per criterion in the terminal summary

_ACCEPTANCE: dict[str, list] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(tag, title): acceptance criterion")


def pytest_runtest_logreport(report):
    tag = getattr(report, "criterion", None)
    if tag is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        entry = _ACCEPTANCE.setdefault(tag[0], [tag[1], []])
        entry[1].append(report.outcome)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        rep.criterion = (marker.args[0], marker.args[1])


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for tag in sorted(_ACCEPTANCE, key=lambda t: (len(t), t)):
        title, outcomes = _ACCEPTANCE[tag]
        verdict = "PASS" if outcomes and all(o == "passed" for o in outcomes) else "FAIL"
        terminalreporter.write_line(f"[{verdict}] criterion {tag}: {title}")
