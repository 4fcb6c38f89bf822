import pytest

# Filled by tests/test_acceptance.py: (number, name, passed, detail)
ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for num, name, ok, detail in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(f"[{num:02d}] {name} ... {'PASS' if ok else 'FAIL'}  ({detail})")


@pytest.fixture
def acceptance_line():
    def record(num, name, ok, detail=""):
        ACCEPTANCE_LINES.append((num, name, bool(ok), detail))
        print(f"[{num:02d}] {name} ... {'PASS' if ok else 'FAIL'}  ({detail})")
        return ok
    return record
