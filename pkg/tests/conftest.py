import pytest

_VERDICTS: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def report():
    """Record one acceptance verdict and fail the test if it did not pass."""
    def record(number: int, passed: bool, detail: str):
        _VERDICTS[number] = (bool(passed), detail)
        print(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
        assert passed, detail
    return record


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_VERDICTS):
        passed, detail = _VERDICTS[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
