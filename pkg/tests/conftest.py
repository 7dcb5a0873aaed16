import pytest

from tiergraph import kernels


BACKENDS = [kernels.python] + ([kernels.compiled] if kernels.compiled is not None else [])

_criteria: dict[int, tuple[str, str, str]] = {}


@pytest.fixture(params=BACKENDS, ids=lambda m: m.__name__.rsplit(".", 1)[-1])
def backend(request):
    return request.param


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): an acceptance criterion, reported in the summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    n, title = mark.args
    detail = "; ".join(str(v) for k, v in item.user_properties if k == "detail")
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        status = "PASS" if rep.passed else "FAIL"
        _criteria[n] = (title, status, detail)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        title, status, detail = _criteria[n]
        line = f"criterion {n} {status}: {title}"
        terminalreporter.write_line(line + (f" ({detail})" if detail else ""))
