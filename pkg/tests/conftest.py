import numpy as np
import pytest

from equibail import BlockSpec


@pytest.fixture(scope="session")
def single_spec():
    # interior maximal cutoff at 5/6, spillover 0.4
    return BlockSpec(sizes=np.array([1.0]), link_probs=np.array([[1.0]]),
                     exposure=0.5, failure_cost=0.4, threshold=2.0,
                     endow_lo=np.array([0.5]), endow_hi=np.array([1.5]))


@pytest.fixture(scope="session")
def single_spec_both_interior():
    # both extremal cutoffs interior: maximal 1/6, minimal 5/6
    return BlockSpec(sizes=np.array([1.0]), link_probs=np.array([[1.0]]),
                     exposure=0.5, failure_cost=0.4, threshold=1.6,
                     endow_lo=np.array([0.5]), endow_hi=np.array([1.5]))


@pytest.fixture(scope="session")
def two_spec():
    # asymmetric blocks, interior maximal cutoffs (~0.379, ~0.621), rho = 0.4
    return BlockSpec(sizes=np.array([0.5, 0.5]),
                     link_probs=np.array([[0.8, 0.3], [0.3, 0.6]]),
                     exposure=0.5, failure_cost=0.4, threshold=2.3,
                     endow_lo=np.array([0.5, 1.0]), endow_hi=np.array([1.5, 2.0]))


@pytest.fixture(scope="session")
def twin_spec():
    # two identical blocks; optimal plan is symmetric and interior at K = 0.02
    return BlockSpec(sizes=np.array([0.5, 0.5]), link_probs=np.ones((2, 2)),
                     exposure=0.5, failure_cost=0.2, threshold=1.96,
                     endow_lo=np.array([0.75, 0.75]), endow_hi=np.array([1.25, 1.25]))
