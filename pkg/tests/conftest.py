import sys


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Print the acceptance-criteria verdict lines after capture ends."""
    module = sys.modules.get("test_acceptance")
    verdicts = getattr(module, "VERDICTS", None) if module else None
    if not verdicts:
        return
    terminalreporter.section("acceptance criteria")
    for line in verdicts:
        terminalreporter.write_line(line)
