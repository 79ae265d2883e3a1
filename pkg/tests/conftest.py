"""Shared fixtures: the acceptance summary log and the certificate store.

The acceptance tests register one line per criterion; the terminal summary
hook prints them after the run so a plain ``pytest -v`` shows the verdicts.
Certificates written by the earlier criteria are replayed by the later one,
so the store is session scoped.
"""

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))


class AcceptanceLog:
    def __init__(self):
        self.lines = []

    def record(self, number, label, passed, detail, elapsed):
        verdict = "PASS" if passed else "FAIL"
        self.lines.append(
            f"ACCEPTANCE {number} [{label}] {verdict} ({elapsed:.2f}s): {detail}"
        )


_LOG = AcceptanceLog()


@pytest.fixture(scope="session")
def acceptance_log():
    return _LOG


@pytest.fixture(scope="session")
def cert_store(tmp_path_factory):
    """Where the acceptance criteria park their certificate files."""
    d = tmp_path_factory.mktemp("certs")
    return {"dir": d, "files": [], "counter": [0]}


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _LOG.lines:
        terminalreporter.section("acceptance criteria")
        for line in _LOG.lines:
            terminalreporter.write_line(line)
