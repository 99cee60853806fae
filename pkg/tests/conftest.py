from contextlib import contextmanager

import pytest

_LINES: list = []


class _Criterion:
    def __init__(self):
        self.failures: list = []
        self.notes: list = []

    def check(self, ok, message):
        if not ok:
            self.failures.append(message)
        return ok

    def note(self, message):
        self.notes.append(message)


@pytest.fixture
def criterion():
    """``with criterion(n, title) as c: c.check(...)`` records a PASS/FAIL line."""

    @contextmanager
    def _open(number, title):
        c = _Criterion()
        try:
            yield c
        except Exception as exc:
            c.failures.append(f"{type(exc).__name__}: {exc}")
        verdict = "FAIL" if c.failures else "PASS"
        detail = "; ".join(c.failures[:3] if c.failures else c.notes)
        line = f"criterion {number} {verdict}: {title}" + (f" ({detail})" if detail else "")
        _LINES.append((number, line))
        print(line)
        assert not c.failures, line

    return _open


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_LINES):
            terminalreporter.write_line(line)
