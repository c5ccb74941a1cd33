"""Echo acceptance verdict lines in the terminal summary.

Verdict lines are printed inside passing tests, so default capture hides
them; the hook below replays any recorded lines after the run so a plain
`pytest -v` shows one line per criterion.
"""

acceptance_lines = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_lines:
            terminalreporter.line(line)
