import os

from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=200,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, label): acceptance criterion number and name")
    config._criteria = []


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    # fixture setup (shared grids) counts toward the criterion's time
    if call.when == "setup":
        item._setup_secs = call.duration
        return
    if call.when != "call":
        return
    n, label = mark.args
    status = "PASS" if call.excinfo is None else "FAIL"
    secs = call.duration + getattr(item, "_setup_secs", 0.0)
    item.config._criteria.append((n, label, status, round(secs, 2)))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    rows = sorted(getattr(config, "_criteria", []))
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for n, label, status, secs in rows:
        terminalreporter.write_line(f"criterion {n:>2} {status}  {label}  ({secs} s)")
