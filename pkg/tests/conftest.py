import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from reflexcycle import params as P  # noqa: E402


@pytest.fixture
def base():
    return P.defaults()


@pytest.fixture
def short(base):
    """Defaults with a short horizon, for fast engine tests."""
    return P.with_overrides(base, {"engine.horizon": 2000, "engine.burn_in": 200})


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        ok, detail = results[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
