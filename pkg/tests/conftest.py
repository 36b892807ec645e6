import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__),
                                                '..')))

from isoscelesgenerator import gen_isosceles  # noqa: E402
from problem import LeastSquaresProblem  # noqa: E402
from sampler import make_rng  # noqa: E402


def random_problem(m, n, seed, consistent=False):
    rng = make_rng(seed)
    a = rng.standard_normal((m, n))
    if consistent:
        b = a @ rng.standard_normal(n)
    else:
        b = rng.standard_normal(m)
    return LeastSquaresProblem(a, b,
                               x_star=np.linalg.lstsq(a, b, rcond=None)[0])


@pytest.fixture
def rng():
    return make_rng(1234)


@pytest.fixture
def small_problem():
    return random_problem(8, 3, seed=7)


@pytest.fixture
def consistent_problem():
    return random_problem(100, 10, seed=11, consistent=True)


@pytest.fixture
def isosceles():
    return gen_isosceles(0.5)


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    monkeypatch.delenv('ROWSOLVE_THREADS', raising=False)
    monkeypatch.delenv('ROWSOLVE_ENUM_GUARD', raising=False)
