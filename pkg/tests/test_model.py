import numpy as np
import pytest

import equibail as eb
from equibail.errors import ParameterError


def spec_one(g=1.0, **kw):
    args = dict(sizes=np.array([1.0]), link_probs=np.array([[g]]), exposure=0.5,
                failure_cost=0.4, threshold=2.0,
                endow_lo=np.array([0.5]), endow_hi=np.array([1.5]))
    args.update(kw)
    return eb.BlockSpec(**args)


# ----------------------------- validation -----------------------------


def test_spec_rejects_bad_parameters():
    with pytest.raises(ParameterError):
        spec_one(exposure=1.0)
    with pytest.raises(ParameterError):
        spec_one(failure_cost=0.0)
    with pytest.raises(ParameterError):
        eb.BlockSpec(sizes=np.array([0.5, 0.4]), link_probs=np.ones((2, 2)),
                     exposure=0.5, failure_cost=0.4, threshold=2.0,
                     endow_lo=np.array([0.0, 0.0]), endow_hi=np.array([1.0, 1.0]))
    with pytest.raises(ParameterError):
        spec_one(endow_hi=np.array([0.5]))


def test_derived_quantities(two_spec):
    assert two_spec.t.tolist() == [0.0, 0.5, 1.0]
    assert np.allclose(two_spec.slopes, [2.0, 2.0])
    assert np.allclose(two_spec.means, [1.0, 1.5])
    assert np.allclose(two_spec.psi, [0.55, 0.45])


# ----------------------------- sampling -----------------------------


def test_sample_complete_digraph():
    net = eb.sample_sbm(spec_one(g=1.0), 4, 0)
    assert net.adjacency.sum() == 16
    assert np.all(net.in_degrees == 4)


def test_sample_zero_probability_repairs_self_loops():
    net = eb.sample_sbm(spec_one(g=0.0), 3, 0)
    assert np.array_equal(net.adjacency, np.eye(3, dtype=np.int8))
    assert np.all(net.in_degrees == 1)


def test_sample_deterministic(two_spec):
    a = eb.sample_sbm(two_spec, 300, 7).adjacency
    b = eb.sample_sbm(two_spec, 300, 7).adjacency
    assert np.array_equal(a, b)
    c = eb.sample_sbm(two_spec, 300, 8).adjacency
    assert not np.array_equal(a, c)


def test_sample_block_densities(two_spec):
    # law-of-large-numbers check at n = 1000, and a 5-sigma band per pair
    net = eb.sample_sbm(two_spec, 1000, 7)
    A, b = net.adjacency, net.block_of
    for k in range(2):
        for l in range(2):
            g = two_spec.link_probs[k, l]
            cells = A[np.ix_(b == k, b == l)]
            dens = cells.mean()
            assert abs(dens - g) < 0.05
            sigma = np.sqrt(g * (1 - g) / cells.size)
            assert abs(dens - g) < 5 * sigma


def test_sample_rejects_tiny_n(two_spec):
    with pytest.raises(ParameterError):
        eb.sample_sbm(two_spec, 1, 0)


# ----------------------------- holdings -----------------------------


def test_cross_holdings_even_split():
    net = eb.sample_sbm(spec_one(g=1.0), 4, 0)
    C = eb.cross_holdings(net, 0.5)
    assert np.allclose(C.entries, 0.125)
    assert np.allclose(C.column_sums, 0.5)


def test_cross_holdings_identity():
    net = eb.sample_sbm(spec_one(g=0.0), 3, 0)
    C = eb.cross_holdings(net, 0.5)
    assert np.allclose(C.entries, 0.5 * np.eye(3))


def test_cross_holdings_two_holders():
    A = np.array([[0, 1, 1], [1, 0, 1], [1, 0, 0]], dtype=np.int8)
    net = eb.FiniteNetwork(n=3, block_of=np.zeros(3, dtype=np.int64),
                           adjacency=A, in_degrees=A.sum(axis=0))
    # column 0 has two holders at weight c/2 each
    C = eb.cross_holdings(net, 0.5)
    assert np.allclose(C.entries[:, 0], [0.0, 0.25, 0.25])
    assert np.allclose(C.entries[:, 1], [0.5, 0.0, 0.0])


def test_column_sums_conserved(two_spec):
    for seed in range(3):
        net = eb.sample_sbm(two_spec, 500, seed)
        C = eb.cross_holdings(net, two_spec.exposure)
        assert np.max(np.abs(C.column_sums - two_spec.exposure)) <= 1e-12


# ----------------------------- block-regular clique -----------------------------


def test_block_regular_uniform():
    spec = eb.BlockSpec(sizes=np.array([0.5, 0.5]), link_probs=np.ones((2, 2)),
                        exposure=0.5, failure_cost=0.4, threshold=2.0,
                        endow_lo=np.array([0.5, 0.5]), endow_hi=np.array([1.5, 1.5]))
    Cb = eb.block_regular_matrix(spec, 4)
    assert np.allclose(Cb.entries, 0.125)


def test_block_regular_single():
    Cb = eb.block_regular_matrix(spec_one(exposure=0.3), 10)
    assert np.allclose(Cb.entries, 0.03)


def test_block_regular_asymmetric_column():
    spec = eb.BlockSpec(sizes=np.array([0.5, 0.5]), link_probs=np.array([[1.0, 1.0], [1.0, 0.0]]),
                        exposure=0.5, failure_cost=0.4, threshold=2.0,
                        endow_lo=np.array([0.5, 0.5]), endow_hi=np.array([1.5, 1.5]))
    Cb = eb.block_regular_matrix(spec, 4)
    # columns in block 2: psi = 2, block-1 rows get 0.25, block-2 rows get 0
    assert np.allclose(Cb.entries[:2, 2:], 0.25)
    assert np.allclose(Cb.entries[2:, 2:], 0.0)
    assert np.allclose(Cb.entries.sum(axis=0), 0.5)


def test_block_regular_zero_psi_errors():
    spec = spec_one(g=0.0)
    with pytest.raises(ParameterError):
        eb.block_regular_matrix(spec, 10)


# ----------------------------- endowments -----------------------------


def test_endowment_ramp_endpoints():
    e = eb.endowment_vector(spec_one(), 3)
    assert np.allclose(e, [0.5, 1.0, 1.5])


def test_endowment_block_boundary_convention(two_spec):
    # label exactly at t_1 belongs to the left block; label 0 to block 0
    assert two_spec.block_of_labels([0.0])[0] == 0
    assert two_spec.block_of_labels([0.5])[0] == 0
    assert two_spec.block_of_labels([0.5 + 1e-12])[0] == 1


def test_endowment_hand_value():
    spec = eb.BlockSpec(sizes=np.array([0.5, 0.5]), link_probs=np.ones((2, 2)),
                        exposure=0.5, failure_cost=0.4, threshold=2.0,
                        endow_lo=np.array([0.0, 2.0]), endow_hi=np.array([1.0, 3.0]))
    assert np.isclose(spec.endowment_at([0.75])[0], 2.5)


def test_endowment_strictly_increasing_within_block(two_spec):
    e = eb.endowment_vector(two_spec, 101)
    b = two_spec.block_of_labels(eb.labels_for(101))
    for k in range(2):
        assert np.all(np.diff(e[b == k]) > 0)


# ----------------------------- book vs market -----------------------------


def test_book_to_market_scaling():
    v = eb.book_to_market([2.0, 2.0], [0.5, 0.5])
    assert np.allclose(v, [1.0, 1.0])
    assert eb.book_threshold_from_market(0.8, 0.5) == pytest.approx(1.6)


def test_default_status_matches_across_scales(single_spec):
    net = eb.sample_sbm(single_spec, 50, 1)
    C = eb.cross_holdings(net, single_spec.exposure)
    e = eb.endowment_vector(single_spec, 50)
    eq = eb.extremal_equilibrium(C, e, single_spec.failure_cost, single_spec.threshold)
    market = eb.book_to_market(eq.values.values, C.column_sums)
    v_star_m = single_spec.threshold * (1 - single_spec.exposure)
    assert np.array_equal(market >= v_star_m, eq.values.values >= single_spec.threshold)


# ----------------------------- spectral deviation -----------------------------


def test_spectral_deviation_zero(two_spec):
    Cb = eb.block_regular_matrix(two_spec, 100)
    sd = eb.spectral_deviation(Cb, Cb, two_spec.link_probs)
    assert sd.lambda_norm == 0.0


def test_spectral_deviation_hand_singular_value():
    a = eb.HoldingsMatrix(entries=np.array([[0.0, 0.1], [0.0, 0.0]]))
    b = eb.HoldingsMatrix(entries=np.zeros((2, 2)))
    sd = eb.spectral_deviation(a, b, np.array([[0.5]]))
    assert sd.lambda_norm == pytest.approx(0.1, abs=1e-12)


def test_spectral_bound_monte_carlo(two_spec):
    # reference bound at alpha = 0.5, p = 0.3; holds in at least 95% of 50 seeds
    Cb = eb.block_regular_matrix(two_spec, 1000)
    hits = 0
    for seed in range(50):
        net = eb.sample_sbm(two_spec, 1000, seed)
        C = eb.cross_holdings(net, two_spec.exposure)
        sd = eb.spectral_deviation(C, Cb, two_spec.link_probs, alpha=0.5)
        hits += sd.lambda_norm <= sd.bound
    assert hits >= 48


def test_spectral_norm_decays_with_n(two_spec):
    meds = {}
    for n in (200, 2000):
        Cb = eb.block_regular_matrix(two_spec, n)
        norms = []
        for seed in range(20):
            C = eb.cross_holdings(eb.sample_sbm(two_spec, n, seed), two_spec.exposure)
            norms.append(eb.spectral_deviation(C, Cb, two_spec.link_probs).lambda_norm)
        meds[n] = np.median(norms)
    assert meds[2000] < meds[200]
