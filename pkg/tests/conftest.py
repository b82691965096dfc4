"""Per-criterion PASS/FAIL summary for the acceptance suite."""

import pytest

_LINES = pytest.StashKey[list]()
_DETAIL = pytest.StashKey[dict]()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")
    config.stash[_LINES] = []
    config.stash[_DETAIL] = {}


@pytest.fixture
def detail(request):
    """Call with a string to attach measurements to the criterion's summary line."""
    store = request.config.stash[_DETAIL]

    def add(text):
        store.setdefault(request.node.nodeid, []).append(text)
        print(text)

    return add


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or report.when != "call":
        return
    number, title = mark.args
    verdict = "PASS" if report.passed else "FAIL"
    extra = "; ".join(item.config.stash[_DETAIL].get(item.nodeid, []))
    line = f"{verdict} criterion {number}: {title}" + (f" ({extra})" if extra else "")
    item.config.stash[_LINES].append((number, line))


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash[_LINES]
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(lines):
        terminalreporter.write_line(line)
