import pytest

_ACCEPTANCE = {}


@pytest.fixture(scope="session")
def acceptance():
    """Record the outcome of a numbered acceptance criterion, then assert it."""

    def check(number, title, ok, detail=""):
        prev = _ACCEPTANCE.get(number)
        ok = bool(ok) and (prev is None or prev[1])
        details = [d for d in ((prev[2] if prev else ""), detail) if d]
        _ACCEPTANCE[number] = (title, ok, "; ".join(details))
        assert ok, f"criterion {number} ({title}) failed: {detail}"

    return check


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, ok, detail = _ACCEPTANCE[number]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {number}. {title}: {detail}")
