"""Echo the acceptance verdict lines past pytest's output capture."""

import sys


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "VERDICT_LINES", None)
    if lines:
        terminalreporter.write_sep("-", "acceptance verdicts")
        for line in lines:
            terminalreporter.write_line(line)
