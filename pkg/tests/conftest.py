"""Shared pytest hooks: a one-line PASS/FAIL summary per acceptance criterion."""

import pytest


class Criterion:
    def __init__(self, record_property):
        self._record = record_property
        self.number = None
        self.title = ""
        self.line = None

    def start(self, number: int, title: str):
        self.number, self.title = number, title

    def verdict(self, ok: bool, detail: str):
        status = "PASS" if ok else "FAIL"
        self.line = f"criterion {self.number}: {status} {self.title} | {detail}"
        self._record("acceptance", self.line)
        print(self.line)
        assert ok, self.line


@pytest.fixture
def criterion(record_property):
    c = Criterion(record_property)
    yield c
    if c.number is not None and c.line is None:
        record_property("acceptance", f"criterion {c.number}: FAIL {c.title} | raised before a verdict")


def pytest_terminal_summary(terminalreporter):
    lines = {}
    for reports in terminalreporter.stats.values():
        for rep in reports:
            if getattr(rep, "when", None) != "teardown":
                continue
            for name, value in getattr(rep, "user_properties", []):
                if name == "acceptance":
                    lines[rep.nodeid] = value
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(lines.values(), key=lambda s: int(s.split()[1].rstrip(":"))):
        terminalreporter.write_line(line)
