import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ocellens import running_example
from ocellens.model import CompositeEventType, CompositeObjectType


@pytest.fixture
def running():
    return running_example()


@pytest.fixture
def types():
    """Shorthand composites for the running example."""
    patient = CompositeObjectType("Patient")
    test = CompositeObjectType("Test")
    return {
        "Patient": patient,
        "Test": test,
        "rp": CompositeEventType("rp"),
        "ot": CompositeEventType("ot"),
        "rt": CompositeEventType("rt"),
    }
