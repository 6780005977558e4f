import json
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from nbwalk.walk import WalkParams

DATA = Path(__file__).parent / "data"
PI = math.pi
GAMMA = math.log(0.82)

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def load(name):
    return json.loads((DATA / name).read_text())


def cplx(pairs):
    return np.array([complex(re, im) for re, im in pairs])


@pytest.fixture
def ref_chain():
    return WalkParams(0.6 * PI, 0.58 * PI, GAMMA, 0.0, 64)
