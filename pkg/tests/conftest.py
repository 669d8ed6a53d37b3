import pytest

from mpcr import validate


@pytest.fixture
def two_type_params():
    """The d=2 workhorse model: fast and slow type, pivot exponent 25."""
    return validate({"v": [0.9, 0.2], "z0": [1, 1], "kappa": 25, "seed": 11})


@pytest.fixture
def five_type_params():
    """Five tied types with geometric initial copy numbers."""
    return validate(
        {"v": [0.9] * 5, "z0": [16, 8, 4, 2, 1], "kappa": 29, "seed": 11}
    )
