from __future__ import annotations

import pytest

from crossfree.scenario import bundled_fixtures, load_scenario

FIXTURES = ("f2_diag2", "z2z3_diag6", "f2_full2_float", "fn_split")


@pytest.fixture(scope="session")
def scenarios():
    assert sorted(FIXTURES) == bundled_fixtures()
    return {name: load_scenario(name) for name in FIXTURES}
