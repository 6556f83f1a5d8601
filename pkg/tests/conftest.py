"""Prints one PASS/FAIL line per acceptance criterion at the end of a run."""

_ACCEPTANCE = []


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        props = dict(report.user_properties)
        _ACCEPTANCE.append((props.get("criterion", report.nodeid.split("::")[-1]),
                            report.outcome == "passed", props.get("measured", "")))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, measured in _ACCEPTANCE:
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"{status}  {name}" + (f"  [{measured}]" if measured else ""))
    failed = sum(not p for _, p, _ in _ACCEPTANCE)
    terminalreporter.write_line(f"{len(_ACCEPTANCE) - failed}/{len(_ACCEPTANCE)} criteria met")
