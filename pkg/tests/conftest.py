import pytest

_VERDICTS = []


@pytest.fixture
def verdict():
    """Record a PASS/FAIL line for the acceptance summary, then assert it."""

    def record(number: int, name: str, ok: bool, detail: str) -> None:
        tag = "PASS" if ok else "FAIL"
        _VERDICTS.append((number, f"[{tag}] criterion {number:2d} {name}: {detail}"))
        assert ok, detail

    return record


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_VERDICTS):
        terminalreporter.write_line(line)
