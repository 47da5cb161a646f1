"""Pair similarity, the removal-cost matrix, and its two numerical checks."""

import time
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from neuronprune import (
    DIAGONAL_SENTINEL,
    Activation,
    FcLayer,
    Network,
    SimilarityConfig,
    SimilarityMode,
    WeightSet,
    build_saliency_matrix,
    forward,
    mean_outgoing_square,
    merge_neurons,
    raw_difference,
    heuristic_similarity,
    similarity,
    verify_bound,
    verify_contraction,
)

RAW = SimilarityConfig(mode=SimilarityMode.RAW_DIFFERENCE)
HEUR = SimilarityConfig()

finite_vec = arrays(
    np.float64,
    st.integers(2, 6),
    elements=st.floats(-50.0, 50.0, allow_nan=False),
)


def seeded_pair_layer(seed, n=6, d=4, k=3):
    rng = np.random.default_rng(seed)
    layer = FcLayer(rng.normal(size=(n, d)), rng.normal(size=n), Activation.SIGMOID)
    nxt = FcLayer(rng.normal(size=(k, n)), rng.normal(size=k), Activation.IDENTITY)
    return layer, nxt


class TestRawDifference:
    def test_identical_sets_give_zero(self):
        ws = WeightSet(np.array([1.5, -2.0]), 0.25)
        assert raw_difference(ws, ws) == 0.0

    def test_orthonormal_pair(self):
        a = WeightSet(np.array([1.0, 0.0]), 0.0)
        b = WeightSet(np.array([0.0, 1.0]), 0.0)
        assert raw_difference(a, b) == pytest.approx(np.sqrt(2.0), abs=1e-15)

    def test_bias_participates(self):
        a = WeightSet(np.array([1.0, 0.0]), 1.0)
        b = WeightSet(np.array([1.0, 0.0]), -1.0)
        assert raw_difference(a, b) == pytest.approx(2.0, abs=1e-15)

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            raw_difference(WeightSet(np.ones(2), 0.0), WeightSet(np.ones(3), 0.0))

    @given(finite_vec, st.floats(-10, 10), st.floats(-10, 10))
    def test_matches_loop_oracle(self, w, bi, bj):
        rng = np.random.default_rng(int(abs(w).sum() * 1e3) % 2**31)
        wj = rng.normal(size=w.shape)
        total = sum((float(a) - float(b)) ** 2 for a, b in zip(w, wj))
        total += (bi - bj) ** 2
        got = raw_difference(WeightSet(w, bi), WeightSet(wj, bj))
        assert got == pytest.approx(np.sqrt(total), rel=1e-14, abs=1e-14)


class TestHeuristicSimilarity:
    def test_identical_nonzero_sets_give_zero(self):
        ws = WeightSet(np.array([0.5, 2.0, -1.0]), 0.75)
        assert heuristic_similarity(ws, ws, HEUR) == 0.0

    def test_scaled_copy_leaves_only_bias_term(self):
        # A 0.9-scaled copy points the same direction, so the direction term
        # vanishes and only |0.1 b| / |1.9 b| survives.
        w = np.array([2.0, -1.0, 0.5])
        b = 0.8
        got = heuristic_similarity(WeightSet(w, b), WeightSet(0.9 * w, 0.9 * b), HEUR)
        assert got == pytest.approx(0.1 / 1.9, rel=1e-12)
        assert got == pytest.approx(0.0526, abs=5e-4)

    def test_opposed_pair_is_large_but_finite(self):
        a = WeightSet(np.array([1.0, 0.0]), 0.5)
        b = WeightSet(np.array([-1.0, 0.0]), -0.5)
        got = heuristic_similarity(a, b, HEUR)
        assert np.isfinite(got)
        assert got > 1e11

    def test_all_zero_pair_warns_and_returns_zero(self):
        z = WeightSet(np.zeros(3), 0.0)
        with pytest.warns(RuntimeWarning):
            assert heuristic_similarity(z, z, HEUR) == 0.0

    @given(finite_vec, st.floats(-5, 5), st.floats(-5, 5))
    def test_symmetric_in_its_arguments(self, w, bi, bj):
        rng = np.random.default_rng(17)
        wj = rng.normal(size=w.shape)
        a, b = WeightSet(w, bi), WeightSet(wj, bj)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            assert heuristic_similarity(a, b, HEUR) == heuristic_similarity(b, a, HEUR)

    def test_guard_must_be_positive(self):
        with pytest.raises(ValueError):
            SimilarityConfig(denominator_guard=0.0)

    def test_dispatcher_selects_mode(self):
        a = WeightSet(np.array([1.0, 0.0]), 0.0)
        b = WeightSet(np.array([0.0, 1.0]), 0.0)
        assert similarity(a, b, RAW) == raw_difference(a, b)
        assert similarity(a, b, HEUR) == heuristic_similarity(a, b, HEUR)


class TestMeanOutgoingSquare:
    def test_single_output(self):
        nxt = FcLayer(np.array([[2.0]]), np.zeros(1), Activation.IDENTITY)
        assert mean_outgoing_square(nxt, 0) == 4.0

    def test_sign_symmetric_column(self):
        nxt = FcLayer(np.array([[1.0], [-1.0], [1.0], [-1.0]]), np.zeros(4), Activation.IDENTITY)
        assert mean_outgoing_square(nxt, 0) == 1.0

    def test_matches_loop_oracle(self):
        rng = np.random.default_rng(5)
        nxt = FcLayer(rng.normal(size=(7, 3)), rng.normal(size=7), Activation.IDENTITY)
        for j in range(3):
            want = sum(float(nxt.weights[k, j]) ** 2 for k in range(7)) / 7
            assert mean_outgoing_square(nxt, j) == pytest.approx(want, rel=1e-14)

    def test_out_of_range_rejected(self):
        nxt = FcLayer(np.ones((2, 3)), np.zeros(2), Activation.IDENTITY)
        with pytest.raises(ValueError):
            mean_outgoing_square(nxt, 3)


class TestSaliencyMatrix:
    def test_duplicate_neurons_cost_nothing_either_way(self):
        layer, nxt = seeded_pair_layer(0, n=4)
        w = layer.weights.copy()
        b = layer.bias.copy()
        w[2] = w[0]
        b[2] = b[0]
        m = build_saliency_matrix(FcLayer(w, b, layer.activation), nxt, HEUR)
        assert m.values[0, 2] == 0.0
        assert m.values[2, 0] == 0.0

    def test_zero_outgoing_column_zeroes_its_removal_costs(self):
        layer, nxt = seeded_pair_layer(1, n=5)
        w2 = nxt.weights.copy()
        w2[:, 3] = 0.0
        m = build_saliency_matrix(layer, FcLayer(w2, nxt.bias, nxt.activation), HEUR)
        col = np.delete(m.values[:, 3], 3)
        np.testing.assert_array_equal(col, 0.0)

    def test_every_entry_matches_double_loop_oracle(self):
        layer, nxt = seeded_pair_layer(2, n=6)
        for cfg in (RAW, HEUR):
            m = build_saliency_matrix(layer, nxt, cfg)
            for i in range(6):
                for j in range(6):
                    if i == j:
                        assert m.values[i, j] == DIAGONAL_SENTINEL
                        continue
                    sim = similarity(layer.weight_set(i), layer.weight_set(j), cfg)
                    want = mean_outgoing_square(nxt, j) * sim**2
                    assert m.values[i, j] == pytest.approx(want, rel=1e-12, abs=1e-300)

    def test_live_entries_nonnegative(self):
        layer, nxt = seeded_pair_layer(3, n=8)
        m = build_saliency_matrix(layer, nxt, HEUR)
        off = ~np.eye(8, dtype=bool)
        assert np.all(m.values[off] >= 0.0)

    def test_single_neuron_layer_rejected(self):
        layer = FcLayer(np.ones((1, 3)), np.zeros(1), Activation.RELU)
        nxt = FcLayer(np.ones((2, 1)), np.zeros(2), Activation.IDENTITY)
        with pytest.raises(ValueError):
            build_saliency_matrix(layer, nxt, HEUR)

    def test_permuting_neurons_permutes_the_matrix(self):
        layer, nxt = seeded_pair_layer(4, n=6)
        m = build_saliency_matrix(layer, nxt, HEUR)
        perm = np.array([3, 0, 5, 1, 4, 2])
        permuted_layer = FcLayer(layer.weights[perm], layer.bias[perm], layer.activation)
        permuted_next = FcLayer(nxt.weights[:, perm], nxt.bias, nxt.activation)
        mp = build_saliency_matrix(permuted_layer, permuted_next, HEUR)
        # entry for (new position of i, new position of j) equals the old entry
        inv = np.argsort(perm)
        np.testing.assert_array_equal(mp.values, m.values[np.ix_(perm, perm)])
        assert mp.values[inv[0], inv[1]] == m.values[0, 1]

    def test_argmin_prefers_smallest_removed_then_kept(self):
        w = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 0.0], [0.0, 1.0]])
        b = np.zeros(4)
        layer = FcLayer(w, b, Activation.RELU)
        nxt = FcLayer(np.ones((1, 4)), np.zeros(1), Activation.IDENTITY)
        m = build_saliency_matrix(layer, nxt, HEUR)
        # pairs (0,2), (2,0), (1,3), (3,1) all cost exactly zero
        kept, removed = m.argmin_live()
        assert (kept, removed) == (2, 0)

    def test_physical_index_tracks_live_mask(self):
        layer, nxt = seeded_pair_layer(5, n=5)
        m = build_saliency_matrix(layer, nxt, HEUR)
        live = m.live.copy()
        live[1] = False
        m2 = type(m)(
            values=m.values,
            live=live,
            layer_index=m.layer_index,
            sim_sq=m.sim_sq,
            mean_sq_out=m.mean_sq_out,
        )
        assert m2.physical_index(0) == 0
        assert m2.physical_index(2) == 1
        assert m2.physical_index(4) == 3
        with pytest.raises(ValueError):
            m2.physical_index(1)


class TestContraction:
    def test_relu_hand_check(self):
        assert (max(3.0, 0.0) - max(-2.0, 0.0)) ** 2 <= (3.0 - (-2.0)) ** 2
        rep = verify_contraction(Activation.RELU, 100, 5.0, seed=3)
        assert rep.violations == 0

    def test_equal_points_are_the_boundary_case(self):
        rep = verify_contraction(Activation.SIGMOID, 1, 0.0, seed=0)
        assert rep.violations == 0

    def test_large_sample_zero_violations_both_activations(self):
        t0 = time.perf_counter()
        for act in (Activation.RELU, Activation.SIGMOID):
            rep = verify_contraction(act, 10**5, 20.0, seed=42)
            assert rep.n_samples == 10**5
            assert rep.violations == 0
            assert rep.max_squared_ratio <= 1.0 + 1e-12
        assert time.perf_counter() - t0 < 1.0

    def test_identity_activation_rejected(self):
        with pytest.raises(ValueError):
            verify_contraction(Activation.IDENTITY, 10, 1.0)


class TestOutputGapBound:
    def seeded_net(self, seed):
        rng = np.random.default_rng(seed)
        return Network(
            layers=(
                FcLayer(rng.normal(size=(8, 10)) / np.sqrt(10), rng.normal(0, 0.1, 8), Activation.RELU),
                FcLayer(rng.normal(size=(3, 8)) / np.sqrt(8), rng.normal(0, 0.1, 3), Activation.IDENTITY),
            ),
            input_dim=10,
        )

    def test_duplicate_pair_has_zero_gap_and_zero_cost_term(self):
        rng = np.random.default_rng(6)
        w1 = rng.normal(size=(4, 3))
        b1 = rng.normal(size=4)
        w1[1] = w1[0]
        b1[1] = b1[0]
        net = Network(
            layers=(
                FcLayer(w1, b1, Activation.RELU),
                FcLayer(rng.normal(size=(2, 4)), rng.normal(size=2), Activation.IDENTITY),
            ),
            input_dim=3,
        )
        samples = verify_bound(net, 0, 0, 1, rng.normal(size=(50, 3)))
        for s in samples:
            assert s.gap_sq <= 1e-28
            assert s.holds

    def test_zero_input_zero_bias_gap_is_zero(self):
        rng = np.random.default_rng(8)
        net = Network(
            layers=(
                FcLayer(rng.normal(size=(4, 3)), np.zeros(4), Activation.RELU),
                FcLayer(rng.normal(size=(2, 4)), np.zeros(2), Activation.IDENTITY),
            ),
            input_dim=3,
        )
        (s,) = verify_bound(net, 0, 0, 1, np.zeros((1, 3)))
        assert s.gap_sq == 0.0
        assert s.holds

    def test_seeded_nets_never_violate(self):
        rng = np.random.default_rng(123)
        for seed in range(5):
            net = self.seeded_net(seed)
            m = build_saliency_matrix(net.layers[0], net.layers[1], RAW)
            i, j = m.argmin_live()
            samples = verify_bound(net, 0, i, j, rng.normal(size=(1000, 10)))
            assert all(s.holds for s in samples)

    def test_gap_matches_direct_forward_difference(self):
        net = self.seeded_net(77)
        rng = np.random.default_rng(9)
        xs = rng.normal(size=(10, 10))
        samples = verify_bound(net, 0, 2, 5, xs)
        merged = merge_neurons(net, 0, kept=2, removed=5)
        for s, x in zip(samples, xs):
            want = float(np.mean((forward(net, x) - forward(merged, x)) ** 2))
            assert s.gap_sq == pytest.approx(want, rel=1e-12, abs=1e-300)

    def test_heuristic_mode_rejected(self):
        net = self.seeded_net(0)
        with pytest.raises(ValueError):
            verify_bound(net, 0, 0, 1, np.zeros((1, 10)), cfg=HEUR)

    def test_inequality_chain_holds_samplewise(self):
        """The squared output gap factors through the inner-product form
        before the norm-product form; both directions must hold."""
        rng = np.random.default_rng(31)
        for seed in range(3):
            net = self.seeded_net(200 + seed)
            layer, nxt = net.layers
            i, j = 1, 4
            eps_vec = np.concatenate(
                [
                    layer.weights[i] - layer.weights[j],
                    [layer.bias[i] - layer.bias[j]],
                ]
            )
            a_sq = mean_outgoing_square(nxt, j)
            for x in rng.normal(size=(200, 10)):
                xb = np.concatenate([x, [1.0]])
                samples = verify_bound(net, 0, i, j, x[None, :])
                mid = a_sq * float(eps_vec @ xb) ** 2
                outer = a_sq * float(eps_vec @ eps_vec) * float(xb @ xb)
                assert samples[0].gap_sq <= mid + 1e-12 * max(mid, 1.0)
                assert mid <= outer + 1e-12 * max(outer, 1.0)


def test_sentinel_is_finite_maximum():
    assert DIAGONAL_SENTINEL == np.finfo(np.float64).max
    assert np.isfinite(DIAGONAL_SENTINEL)
