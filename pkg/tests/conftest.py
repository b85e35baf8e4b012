import numpy as np
import pytest

from fishermarket import BudgetMode, Distribution, GenerationSpec, MarketInstance, UtilityClass, generate_instance


def symmetric(n=2, m=2, utility=UtilityClass.LINEAR):
    return MarketInstance(np.ones((n, m)), np.ones(n), utility)


def random_instance(utility, n, m, seed, budget=None, dist=Distribution.UNIFORM):
    return generate_instance(GenerationSpec(dist, n, m, budget or BudgetMode.unit(), seed, utility))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
