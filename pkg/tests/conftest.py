import pytest

_criteria = {}


@pytest.fixture
def report():
    """Record and print one pass/fail line for an acceptance criterion."""
    def emit(number: int, title: str, ok: bool, detail: str = "") -> bool:
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} {title}"
        if detail:
            line += f" [{detail}]"
        print(line)
        _criteria[number] = line
        return ok
    return emit


def pytest_terminal_summary(terminalreporter):
    if _criteria:
        terminalreporter.section("acceptance criteria")
        for number in sorted(_criteria):
            terminalreporter.write_line(_criteria[number])
