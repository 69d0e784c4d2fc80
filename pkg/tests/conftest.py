import pytest

ACCEPTANCE: dict[int, str] = {}


@pytest.fixture
def criterion():
    """Record one summary line per acceptance criterion."""

    def record(k: int, ok: bool, detail: str) -> None:
        ACCEPTANCE[k] = f"criterion {k:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(ACCEPTANCE[k])

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
