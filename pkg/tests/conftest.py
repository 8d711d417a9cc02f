import pytest

ACCEPTANCE_LINES = []


@pytest.fixture
def verdict():
    """Record one pass/fail line for an acceptance criterion, then assert it."""

    def record(number, title, ok, detail, seconds, limit=None):
        timing = f"{seconds:.2f}s" + (f" (limit {limit:g}s)" if limit else "")
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} | {detail} | {timing}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line
        if limit is not None:
            assert seconds < limit, f"criterion {number} took {seconds:.2f}s, limit {limit}s"

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
