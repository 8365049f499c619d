from pathlib import Path

import pytest

from socprac import fixture_text, parse_practice, parse_scenario

FIXTURES = Path(__file__).resolve().parents[1] / "src" / "socprac" / "fixtures"
GOLDEN = Path(__file__).resolve().parent / "golden"


def load(practice="lecture.sp", scenario="lecture.scn"):
    sp = parse_practice(fixture_text(practice))
    return sp, parse_scenario(fixture_text(scenario), sp)


@pytest.fixture
def lecture():
    return load()


@pytest.fixture
def fixtures_dir():
    return FIXTURES
