import time

import pytest

from setschemes.core import SetPartition

# every scheme a test produces, checked for the coherence consequences at the end
PRODUCED: dict[bytes, tuple[str, SetPartition]] = {}

# acceptance criterion number -> (passed, detail)
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_collection_modifyitems(config, items):
    items.sort(key=lambda item: item.get_closest_marker("last") is not None)


@pytest.fixture
def record(request):
    """Register coherent schemes produced by a test."""

    def _record(*schemes):
        for S in schemes:
            PRODUCED.setdefault(S.colors.tobytes() + bytes([S.degree]), (request.node.nodeid, S))
        return schemes[0] if len(schemes) == 1 else schemes

    return _record


@pytest.fixture
def timed():
    """Context-free stopwatch: ``elapsed()`` seconds since the test started."""
    start = time.perf_counter()
    return lambda: time.perf_counter() - start


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")
