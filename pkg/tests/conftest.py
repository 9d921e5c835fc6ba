import pytest

_acceptance: dict[str, tuple[str, str]] = {}


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    marker = report.user_properties and dict(report.user_properties).get("acceptance")
    if marker:
        crit_id, desc = marker
        status = "PASS" if report.outcome == "passed" else "FAIL"
        prev = _acceptance.get(crit_id)
        if prev is None or prev[0] == "PASS":
            _acceptance[crit_id] = (status, desc)


@pytest.hookimpl(tryfirst=True)
def pytest_runtest_setup(item):
    marker = item.get_closest_marker("acceptance")
    if marker:
        item.user_properties.append(("acceptance", tuple(marker.args)))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for crit_id in sorted(_acceptance, key=lambda s: int(s.lstrip("AC"))):
        status, desc = _acceptance[crit_id]
        terminalreporter.write_line(f"[{status}] {crit_id}: {desc}")
