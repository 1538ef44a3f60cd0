"""Collects one verdict line per acceptance criterion for the terminal summary."""

VERDICTS: dict[int, str] = {}


def record(number: int, ok: bool, title: str, detail: str) -> None:
    VERDICTS[number] = f"criterion {number} {'PASS' if ok else 'FAIL'}: {title} | {detail}"
    print(VERDICTS[number])


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(VERDICTS):
            terminalreporter.write_line(VERDICTS[k])
