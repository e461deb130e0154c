import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from statetest import frontend, validate
from statetest.scenario import Scenario

FIXTURES = Path(__file__).parent.parent / "fixtures"

SM_SOURCE = """\
statechart Sm {
  var value1: int = 0
  var value2: int = 0
  var value3: bool = false
  initial -> State1
  state State1 { when [value1 == 13] -> State2 }
  state State2 { when [value2 == 54] -> State3 }
  state State3 { when [value3 == true] -> final }
}
"""

SM_SCENARIO = Scenario(
    machine="Sm",
    expectations=("State2", "State3", "__final__"),
    variables=("value1", "value2", "value3"),
    inputs=(13, 54, True),
)


@pytest.fixture
def sm_model():
    return frontend.parse_statechart(frontend.SourceText(SM_SOURCE))


@pytest.fixture
def sm_vm(sm_model):
    return validate(sm_model)


@pytest.fixture
def sm_scenario():
    return SM_SCENARIO
