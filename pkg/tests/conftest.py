import random

import pytest

from qrc1.syntax import Signature


@pytest.fixture
def sig() -> Signature:
    return Signature(constants=("c0", "c1"), relations=(("S", 1), ("R", 2)))


@pytest.fixture
def small_sig() -> Signature:
    return Signature(constants=("c0",), relations=(("S", 1),))


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20260823)
