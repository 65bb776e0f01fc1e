import pytest

from linlam.catalogue import default_catalogue

# criterion number -> (passed, description, seconds); filled by test_acceptance
ACCEPTANCE: dict = {}


@pytest.fixture(scope="session")
def cat():
    return default_catalogue()


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, text, secs = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {text}  ({secs:.2f}s)")
