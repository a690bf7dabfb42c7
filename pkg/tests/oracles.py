"""Independent reference computations used by the tests.

The enumeration oracle walks every 0/1 solvency vector instead of iterating,
so it checks the monotone solvers without sharing their search logic. Random
instances are drawn from a fixed generator for reproducibility.
"""

import numpy as np
import scipy.linalg

from equibail import BlockSpec, cross_holdings, endowment_vector, sample_sbm


def enumerate_extremes(C, e, beta, v_star):
    """All-feasible enumeration over 2^n solvency vectors.

    Returns (kappa_max, kappa_min, count): the pointwise-extremal feasible
    vectors (asserting they belong to the feasible set) and the number of
    feasible vectors.
    """
    Cm = np.asarray(C, dtype=float)
    n = Cm.shape[0]
    assert n <= 16, "enumeration oracle is exponential in n"
    lu = scipy.linalg.lu_factor(np.eye(n) - Cm)
    kappas = ((np.arange(2 ** n)[:, None] >> np.arange(n)[None, :]) & 1).astype(float)
    rhs = e[None, :] - beta * (1.0 - kappas)
    values = scipy.linalg.lu_solve(lu, rhs.T).T
    feas = np.all((values >= v_star) == (kappas == 1), axis=1)
    feasible = kappas[feas]
    assert feasible.shape[0] >= 1, "feasible set is empty"
    k_max = feasible.max(axis=0)
    k_min = feasible.min(axis=0)
    assert any(np.array_equal(k_max, f) for f in feasible), "pointwise max not feasible"
    assert any(np.array_equal(k_min, f) for f in feasible), "pointwise min not feasible"
    return k_max.astype(np.int8), k_min.astype(np.int8), int(feas.sum())


def random_instance(rng):
    """Small random network instance (C, e, beta, v_star) with n <= 12."""
    m = int(rng.integers(1, 4))
    n = int(rng.integers(max(4, m), 13))
    sizes = rng.uniform(0.5, 1.5, size=m)
    sizes /= sizes.sum()
    g = rng.uniform(0.2, 1.0, size=(m, m))
    c = float(rng.uniform(0.2, 0.8))
    beta = float(rng.uniform(0.1, 1.0))
    lo = rng.uniform(0.0, 1.0, size=m)
    hi = lo + rng.uniform(0.3, 1.5, size=m)
    spec = BlockSpec(sizes=sizes, link_probs=g, exposure=c, failure_cost=beta,
                     threshold=0.0, endow_lo=lo, endow_hi=hi)
    net = sample_sbm(spec, n, int(rng.integers(0, 2 ** 32)))
    C = cross_holdings(net, c).entries
    e = endowment_vector(spec, n)
    v_all = np.linalg.solve(np.eye(n) - C, e)
    v_star = float(rng.uniform(v_all.min() - 0.3, v_all.max() + 0.3))
    return C, e, beta, v_star
