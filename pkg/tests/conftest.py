import shutil
from pathlib import Path

import pytest

FIXTURE_CACHE = Path(__file__).parent / "data" / "openml_cache"

CRITERIA = {
    1: "gradient oracle",
    2: "InfoNCE oracle",
    3: "Wilcoxon oracle",
    4: "dataset metrics (ids 37, 1485)",
    5: "difficulty rule (ids 1497, 37)",
    6: "weighted-F1 cell reproduction (ids 37, 1464)",
    7: "PerDiff on stored values for 1485",
    8: "win-matrix properties",
    9: "corruption distinguishers",
    10: "OOM guard",
    11: "run determinism",
}
_outcomes: dict[int, list[tuple[str, str, str | None]]] = {}


@pytest.fixture
def openml_cache(tmp_path):
    """A writable copy of the vendored OpenML cache (id 37 only)."""
    dest = tmp_path / "openml"
    shutil.copytree(FIXTURE_CACHE, dest)
    return dest


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    report = (yield).get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    n = marker.args[0]
    if report.when == "call" or (report.when == "setup" and not report.passed):
        status = "passed" if report.passed else ("skipped" if report.skipped else "failed")
        observed = dict(report.user_properties).get("observed")
        _outcomes.setdefault(n, []).append((item.name, status, observed))


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n, title in CRITERIA.items():
        runs = _outcomes.get(n)
        if not runs:
            continue
        failed = [name for name, s, _ in runs if s != "passed"]
        verdict = "FAIL" if failed else "PASS"
        detail = f" (failing: {', '.join(failed)})" if failed else ""
        tr.write_line(f"{verdict} criterion {n}: {title}{detail}")
        for name, s, observed in runs:
            if observed:
                tr.write_line(f"    {name}: {observed}")
