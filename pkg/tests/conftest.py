"""Collects the outcome of every acceptance-criterion test and prints one
PASS/FAIL line per criterion at the end of the run."""
import pytest

_results = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    label = marker.args[0]
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        detail = dict(item.user_properties).get("detail", "")
        status = "PASS" if rep.passed else ("SKIP" if rep.skipped else "FAIL")
        _results[label] = (status, marker.args[1] if len(marker.args) > 1 else "", detail)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_results, key=lambda s: int(s.split("-")[1])):
        status, title, detail = _results[label]
        line = f"{label:<6} {status}  {title}"
        if detail:
            line += f" [{detail}]"
        terminalreporter.write_line(line)
