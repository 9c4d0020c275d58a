import pathlib
import random
from unittest.mock import MagicMock

import pytest

from supbound import settings
from supbound.actions.core import ActionConfiguration, ActionResult
from supbound.services.assignments import load_assignment
from supbound.services.sampling import SamplingPlan
from supbound.services.trs_parser import parse_trs

FIXTURES_DIR = pathlib.Path(__file__).parent / "fixtures"


def load_fixture_trs(name: str):
    return parse_trs((FIXTURES_DIR / f"{name}.trs").read_text())


def load_fixture_assignment(name: str, trs):
    return load_assignment((FIXTURES_DIR / f"{name}.si").read_text(), trs)


@pytest.fixture
def fixtures_dir():
    return FIXTURES_DIR


@pytest.fixture
def qiex_trs():
    return load_fixture_trs("qiex")


@pytest.fixture
def qiex_assignment(qiex_trs):
    return load_fixture_assignment("qiex", qiex_trs)


@pytest.fixture
def halflog_trs():
    return load_fixture_trs("halflog")


@pytest.fixture
def halflog_assignment(halflog_trs):
    return load_fixture_assignment("halflog", halflog_trs)


@pytest.fixture
def doubling_trs():
    return load_fixture_trs("doubling")


@pytest.fixture
def doubling_assignment(doubling_trs):
    return load_fixture_assignment("doubling", doubling_trs)


@pytest.fixture
def gadget_id_trs():
    return load_fixture_trs("gadget-id")


@pytest.fixture
def gadget_sqrt2_trs():
    return load_fixture_trs("gadget-sqrt2")


@pytest.fixture
def gadget_sqrt2_assignment(gadget_sqrt2_trs):
    return load_fixture_assignment("gadget-sqrt2", gadget_sqrt2_trs)


@pytest.fixture
def pointwise_only_trs():
    # [f] = X^2 + 1 >= 2X = [g] holds everywhere but not coefficient-wise
    return parse_trs("f(x) -> g(x)\ng(x) -> x\n")


@pytest.fixture
def pointwise_only_assignment(pointwise_only_trs):
    return load_assignment("f = X^2 + 1\ng = 2 * X\n", pointwise_only_trs)


@pytest.fixture
def small_plan():
    return SamplingPlan(grid_max=4, random_points=50)


@pytest.fixture
def rng():
    return random.Random(settings.DEFAULT_SEED)


class MockCheckConfiguration(ActionConfiguration):
    trs_path: str


@pytest.fixture
def mock_action_result():
    return ActionResult(exit_code=0, result={"orthogonal": True}, text="orthogonal: yes\n")


@pytest.fixture
def mock_action_handlers(mocker, mock_action_result):
    mock_action_handler = MagicMock(return_value=mock_action_result)
    mock_action_handlers = {"check": (mock_action_handler, MockCheckConfiguration)}
    return mock_action_handlers


@pytest.fixture
def mock_publish_event():
    return MagicMock()
