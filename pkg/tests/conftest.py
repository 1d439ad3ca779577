import warnings

# instances drawn with a large pilot overhead warn by design
warnings.filterwarnings("ignore", message="pilot_overhead", category=RuntimeWarning)

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
