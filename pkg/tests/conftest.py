import numpy as np
import pytest

from kernelsolve.numerics import STANDARD_FREQUENCY, STANDARD_SPATIAL, ComplexField


@pytest.fixture(scope="session")
def sg():
    return STANDARD_SPATIAL


@pytest.fixture(scope="session")
def fg():
    return STANDARD_FREQUENCY


@pytest.fixture(scope="session")
def gaussian(sg):
    return ComplexField(np.exp(-sg.points**2 / 2), sg)


def rel_err(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(a), np.linalg.norm(b)))
