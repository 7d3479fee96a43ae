"""Collects acceptance-criterion outcomes and prints one line per criterion."""
import pytest

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, title = mark.args
    entry = _CRITERIA.setdefault(number, {"title": title, "ok": True, "details": []})
    if rep.failed:
        entry["ok"] = False
        if rep.when == "call":
            msg = str(call.excinfo.value).strip().splitlines()
            entry["details"].append(f"{item.name} failed: {msg[0] if msg else call.excinfo.typename}")
    if rep.when == "call":
        entry["details"].extend(v for k, v in item.user_properties if k == "detail")


@pytest.fixture
def detail(request):
    """Attach a measured value to the criterion line of this test."""
    return lambda text: request.node.user_properties.append(("detail", text))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        e = _CRITERIA[number]
        status = "PASS" if e["ok"] else "FAIL"
        terminalreporter.write_line(f"criterion {number}: {status} {e['title']} | "
                                    + "; ".join(e["details"]))
