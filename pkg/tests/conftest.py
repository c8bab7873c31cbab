import time

import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

_ACCEPTANCE = {}


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("acceptance")
        if m is not None:
            item.user_properties.append(("criterion", m.kwargs["criterion"]))
            item.user_properties.append(("title", m.kwargs["title"]))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_call(item):
    t0 = time.perf_counter()
    yield
    item.user_properties.append(("elapsed", time.perf_counter() - t0))


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        entry = _ACCEPTANCE.setdefault(props["criterion"], {"title": props["title"], "outcomes": [], "elapsed": 0.0})
        outcome = "xfail" if hasattr(report, "wasxfail") else report.outcome
        entry["outcomes"].append(outcome)
        entry["elapsed"] += props.get("elapsed", 0.0)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_ACCEPTANCE):
        e = _ACCEPTANCE[k]
        outs = e["outcomes"]
        if all(o == "passed" for o in outs):
            mark = "PASS"
        elif all(o in ("passed", "xfail") for o in outs):
            mark = "FAIL (known: unattainable as stated)"
        else:
            mark = "FAIL"
        n_ok = sum(o == "passed" for o in outs)
        terminalreporter.write_line(f"criterion {k:2d} {mark}  {e['title']}  "
                                    f"[{n_ok}/{len(outs)} tests, {e['elapsed']:.1f}s]")
