import pytest

# (criterion number, passed, detail) recorded by the acceptance suite
ACCEPTANCE = []


@pytest.fixture
def record_criterion():
    def record(number, checks, detail=""):
        passed = all(checks.values())
        parts = ", ".join(f"{name}={'ok' if ok else 'FAIL'}" for name, ok in checks.items())
        ACCEPTANCE.append((number, passed, f"{parts}; {detail}" if detail else parts))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  ({detail})")
