import time

import pytest

_LINES = {}


class CriterionReport:
    """Collects one pass/fail line per acceptance criterion."""

    def __init__(self):
        self.key = None
        self.title = ""
        self.t0 = 0.0
        self.finished = False

    def start(self, key: int, title: str):
        self.key, self.title, self.t0 = key, title, time.perf_counter()

    def elapsed(self) -> float:
        return time.perf_counter() - self.t0

    def done(self, ok: bool, detail: str):
        status = "PASS" if ok else "FAIL"
        _LINES[self.key] = f"[{status}] criterion {self.key:2d}: {self.title} | {detail} | {self.elapsed():.1f} s"
        self.finished = True


@pytest.fixture
def criterion():
    rep = CriterionReport()
    yield rep
    if rep.key is not None and not rep.finished:
        _LINES[rep.key] = f"[FAIL] criterion {rep.key:2d}: {rep.title} | raised before completing"


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for key in sorted(_LINES):
            terminalreporter.write_line(_LINES[key])
