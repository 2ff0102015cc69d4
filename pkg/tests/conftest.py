import pytest

_LINES: dict[int, str] = {}


class Ledger:
    """Collects one PASS/FAIL line per acceptance criterion."""

    def record(self, number: int, ok: bool, title: str, detail: str = "") -> bool:
        status = "PASS" if ok else "FAIL"
        line = f"[{status}] criterion {number:2d}: {title}"
        if detail:
            line += f" ({detail})"
        _LINES[number] = line
        print(line)
        return ok


@pytest.fixture(scope="session")
def acceptance() -> Ledger:
    return Ledger()


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_LINES):
        terminalreporter.write_line(_LINES[k])
