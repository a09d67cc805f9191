"""Prints a one-line verdict per acceptance check after the run."""

_ACCEPTANCE_FILE = "test_acceptance.py"
_results: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if _ACCEPTANCE_FILE in report.nodeid:
        if report.when == "call" or (report.when == "setup" and report.failed):
            _results[report.nodeid] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.write_line("")
    terminalreporter.write_line("acceptance checks:")
    for nodeid in sorted(_results, key=_order):
        name = nodeid.split("::")[-1]
        verdict = "PASS" if _results[nodeid] == "passed" else "FAIL"
        terminalreporter.write_line(f"  {name}: {verdict}")


def _order(nodeid):
    import re

    m = re.search(r"test_(\d+)", nodeid)
    return int(m.group(1)) if m else 99
