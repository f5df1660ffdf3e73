"""Shared fixtures: the expensive searches run once per session, with wall
times recorded so the acceptance tests can check the runtime budgets."""

import time
from dataclasses import dataclass

import pytest

from torusorbits import MorseHomology, OrbitFinder, builtin


@dataclass
class TimedFit:
    finder: object
    seconds: float


def _timed_fit(estimator, system):
    t0 = time.perf_counter()
    estimator.fit(system)
    return TimedFit(finder=estimator, seconds=time.perf_counter() - t0)


@pytest.fixture(scope="session")
def pm_t2():
    return _timed_fit(OrbitFinder(starts=200, seed=0), builtin("product_morse", 1, 0.01))


@pytest.fixture(scope="session")
def pmp_t2():
    return _timed_fit(OrbitFinder(starts=200, seed=0),
                      builtin("product_morse_perturbed", 1, 0.01))


@pytest.fixture(scope="session")
def rotating_t2():
    return _timed_fit(OrbitFinder(starts=200, seed=0),
                      builtin("rotating_coupling", 1, 0.01))


@pytest.fixture(scope="session")
def pm_t4():
    return _timed_fit(OrbitFinder(starts=2000, seed=0), builtin("product_morse", 2, 0.01))


@pytest.fixture(scope="session")
def perfect_surface():
    return builtin("product_morse", 1, 1.0)


@pytest.fixture(scope="session")
def perturbed_surface():
    return builtin("product_morse_perturbed", 1, 1.0)


@pytest.fixture(scope="session")
def perfect_complex(perfect_surface):
    return MorseHomology().fit(perfect_surface)


@pytest.fixture(scope="session")
def perturbed_complex(perturbed_surface):
    return MorseHomology().fit(perturbed_surface)
