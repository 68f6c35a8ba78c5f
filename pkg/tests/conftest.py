"""Shared fixtures and the acceptance-criteria terminal report."""

import re
from pathlib import Path

import pytest

DATA_DIR = Path(__file__).parent / "data"

CRITERIA_LABELS = {
    "c01": "power iteration matches dense linear solve",
    "c02": "google matrix columns stochastic, matvec preserves simplex",
    "c03": "damped spectrum follows the alpha scaling law",
    "c04": "dense spectrum: leading value, conjugacy, trace",
    "c05": "two leading eigenvalues for a two-community network",
    "c06": "combined ordering matches the square-sweep oracle",
    "c07": "power-law exponent recovery, exact and noisy",
    "c08": "rank correlator identities",
    "c09": "synthetic ensemble spindle shape and symmetry",
    "c10": "synthetic mass ranking follows an inverse power law",
    "c11": "global rescaling leaves orderings and correlators intact",
    "c12": "symmetric network: both rankings coincide",
    "c13": "command-line runs are byte-for-byte reproducible",
    "c14": "reference yearly dataset reproduces published rankings",
}

_results: dict[str, str] = {}


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture(scope="session")
def three_country_csv() -> str:
    return (DATA_DIR / "flows_3country.csv").read_text()


@pytest.fixture(scope="session")
def multiyear_csv() -> str:
    return (DATA_DIR / "flows_multiyear.csv").read_text()


@pytest.fixture(scope="session")
def symmetric_csv() -> str:
    return (DATA_DIR / "flows_symmetric.csv").read_text()


@pytest.fixture(scope="session")
def uniform_csv() -> str:
    return (DATA_DIR / "flows_uniform.csv").read_text()


def _criterion_key(nodeid: str) -> str | None:
    if "test_acceptance.py" not in nodeid:
        return None
    match = re.search(r"test_(c\d{2})", nodeid)
    return match.group(1) if match else None


# A criterion split across several tests fails if any part fails and
# counts as skipped only when every part was skipped.
_PRIORITY = {"FAIL": 3, "PASS": 2, "SKIP": 1}


def _record(key: str, outcome: str) -> None:
    if _PRIORITY[outcome] >= _PRIORITY.get(_results.get(key, ""), 0):
        _results[key] = outcome


def pytest_runtest_logreport(report):
    key = _criterion_key(report.nodeid)
    if key is None:
        return
    if report.when == "setup" and report.skipped:
        _record(key, "SKIP")
    elif report.when == "call":
        _record(key, "PASS" if report.passed else "SKIP" if report.skipped else "FAIL")
    elif report.when in ("setup", "teardown") and report.failed:
        _record(key, "FAIL")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_results):
        label = CRITERIA_LABELS.get(key, "")
        terminalreporter.write_line(f"{key.upper()}  {_results[key]:<4}  {label}")
