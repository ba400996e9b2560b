"""Shared pytest plumbing for the suite."""

_criterion_lines = []


def record_criterion(line):
    """Stash a one-line acceptance verdict for the end-of-run summary."""
    _criterion_lines.append(line)


def pytest_terminal_summary(terminalreporter):
    if _criterion_lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in _criterion_lines:
            terminalreporter.write_line(line)
