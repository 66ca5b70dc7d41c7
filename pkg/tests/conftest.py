import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

# Per-criterion pass/fail lines collected by test_acceptance.report(); echoed
# after the run so they survive pytest's output capture.
acceptance_lines = []


def pytest_terminal_summary(terminalreporter):
    if acceptance_lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in acceptance_lines:
            terminalreporter.write_line(line)
