"""Collects acceptance-check result lines and echoes them after the run."""

acceptance_lines: list[str] = []


def report_line(line: str) -> None:
    acceptance_lines.append(line)


def pytest_terminal_summary(terminalreporter):
    if acceptance_lines:
        terminalreporter.section("acceptance report")
        for line in acceptance_lines:
            terminalreporter.line(line)
