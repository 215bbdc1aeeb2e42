import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from indoner.corpus import TAGS, validate_iob
from indoner.heads import (
    CrfParams, HiddenParams, crf_log_partition, crf_marginals, crf_score, emissions, iob_mask,
    logsumexp, loss, loss_and_grad, softmax, softmax_decode, viterbi_decode,
)
from oracles import brute_argmax, brute_log_partition, emissions_scalar, path_score


def random_crf(rng, T, K, integer=False):
    if integer:
        draw = lambda *shape: rng.integers(-2, 3, size=shape).astype(float)  # noqa: E731
    else:
        draw = lambda *shape: rng.normal(size=shape)  # noqa: E731
    return draw(T, K), CrfParams(draw(K, K), draw(K), draw(K))


def as_lists(e, crf):
    return e.tolist(), crf.trans.tolist(), crf.start.tolist(), crf.stop.tolist()


class TestEmissions:
    def test_zero_params(self):
        p = HiddenParams(np.zeros((4, 6)), np.zeros(4), np.zeros((5, 4)), np.zeros(5))
        assert np.all(emissions(np.ones((3, 6)), p) == 0)

    def test_bias_passthrough(self):
        b_out = np.eye(5)[2]
        p = HiddenParams(np.zeros((4, 6)), np.zeros(4), np.zeros((5, 4)), b_out)
        np.testing.assert_array_equal(emissions(np.ones((3, 6)), p), np.tile(b_out, (3, 1)))

    def test_matches_scalar_oracle(self):
        rng = np.random.default_rng(0)
        p = HiddenParams(rng.normal(size=(4, 6)), rng.normal(size=4), rng.normal(size=(5, 4)),
                         rng.normal(size=5))
        x = rng.normal(size=(3, 6))
        ref = emissions_scalar(x.tolist(), p.W_h.tolist(), p.b_h.tolist(), p.W_out.tolist(),
                               p.b_out.tolist())
        np.testing.assert_allclose(emissions(x, p), ref, rtol=0, atol=1e-12)

    def test_shape_mismatch(self):
        p = HiddenParams(np.zeros((4, 6)), np.zeros(4), np.zeros((5, 4)), np.zeros(5))
        with pytest.raises(ValueError):
            emissions(np.ones((3, 5)), p)


class TestSoftmax:
    def test_tie(self):
        tags, probs = softmax_decode(np.array([[0.0, 0.0]]))
        assert tags == [0]
        np.testing.assert_allclose(probs, [[0.5, 0.5]])

    def test_analytic(self):
        _, probs = softmax_decode(np.array([[math.log(2), 0.0]]))
        np.testing.assert_allclose(probs, [[2 / 3, 1 / 3]], rtol=1e-15)

    def test_large_scores_do_not_overflow(self):
        _, probs = softmax_decode(np.array([[1000.0, 0.0]]))
        with mpmath.workdps(50):
            ref = [mpmath.exp(1000) / (mpmath.exp(1000) + 1), 1 / (mpmath.exp(1000) + 1)]
        assert np.all(np.isfinite(probs))
        np.testing.assert_allclose(probs[0], [float(r) for r in ref], rtol=0, atol=1e-300)

    @given(st.lists(st.floats(-50, 50), min_size=1, max_size=11))
    def test_rows_normalized(self, row):
        assert softmax(np.array([row])).sum() == pytest.approx(1.0, abs=1e-9)

    @given(st.lists(st.integers(-50, 50), min_size=1, max_size=11), st.integers(-100, 100))
    def test_argmax_shift_invariant(self, row, c):
        # integer scores keep the shifted row exact, ties included
        e = np.array([row], dtype=float)
        assert softmax_decode(e)[0] == softmax_decode(e + c)[0] == [int(np.argmax(row))]


class TestCrfScore:
    def test_all_zero(self):
        crf = CrfParams.zeros(3)
        assert crf_score(np.zeros((4, 3)), crf, [0, 2, 1, 1]) == 0.0

    def test_single_token(self):
        rng = np.random.default_rng(1)
        e, crf = random_crf(rng, 1, 4)
        assert crf_score(e, crf, [2]) == pytest.approx(crf.start[2] + e[0, 2] + crf.stop[2], abs=1e-15)

    def test_direct_sum(self):
        rng = np.random.default_rng(2)
        e, crf = random_crf(rng, 3, 4)
        path = [3, 0, 2]
        assert crf_score(e, crf, path) == pytest.approx(path_score(*as_lists(e, crf), path), abs=1e-12)

    def test_bad_index(self):
        with pytest.raises(IndexError):
            crf_score(np.zeros((2, 3)), CrfParams.zeros(3), [0, 3])
        with pytest.raises(ValueError):
            crf_score(np.zeros((2, 3)), CrfParams.zeros(3), [0])


class TestPartition:
    def test_uniform(self):
        assert crf_log_partition(np.zeros((3, 2)), CrfParams.zeros(2)) == pytest.approx(math.log(8), abs=1e-12)
        assert crf_log_partition(np.zeros((1, 11)), CrfParams.zeros(11)) == pytest.approx(math.log(11), abs=1e-12)

    @pytest.mark.parametrize("seed", range(30))
    def test_brute_force(self, seed):
        rng = np.random.default_rng(seed)
        e, crf = random_crf(rng, int(rng.integers(1, 6)), int(rng.integers(2, 6)))
        assert abs(crf_log_partition(e, crf) - brute_log_partition(*as_lists(e, crf))) < 1e-10

    def test_large_scores_stay_finite(self):
        e = np.array([[800.0, -800.0], [900.0, 0.0]])
        crf = CrfParams(np.array([[0.0, 700.0], [0.0, 0.0]]), np.zeros(2), np.zeros(2))
        assert crf_log_partition(e, crf) == pytest.approx(brute_log_partition(*as_lists(e, crf)), abs=1e-9)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 10**6), st.lists(st.floats(-20, 20), min_size=1, max_size=5))
    def test_row_shift(self, seed, shift):
        rng = np.random.default_rng(seed)
        e, crf = random_crf(rng, len(shift), 3)
        moved = e + np.array(shift)[:, None]
        assert crf_log_partition(moved, crf) == pytest.approx(
            crf_log_partition(e, crf) + sum(shift), abs=1e-9)

    def test_marginals_are_distributions(self):
        rng = np.random.default_rng(3)
        e, crf = random_crf(rng, 4, 3)
        log_z, nodes, pairs = crf_marginals(e, crf)
        assert log_z == pytest.approx(crf_log_partition(e, crf), abs=1e-12)
        np.testing.assert_allclose(nodes.sum(axis=1), 1.0, atol=1e-12)
        np.testing.assert_allclose(pairs.sum(axis=(1, 2)), 1.0, atol=1e-12)
        np.testing.assert_allclose(pairs.sum(axis=2), nodes[:-1], atol=1e-12)

    def test_logsumexp_all_masked(self):
        assert logsumexp(np.array([-np.inf, -np.inf])) == -np.inf


class TestViterbi:
    def test_emissions_dominate(self):
        path, best = viterbi_decode(np.array([[1.0, 0.0], [0.0, 1.0]]), CrfParams.zeros(2))
        assert path == [0, 1] and best == 2.0

    def test_all_zero_ties_pick_index_zero(self):
        path, _ = viterbi_decode(np.zeros((4, 3)), CrfParams.zeros(3))
        assert path == [0, 0, 0, 0]

    def test_tie_break_is_lexicographic(self):
        # [0, 1] and [1, 0] both score 1; the smaller sequence must win.
        crf = CrfParams(np.array([[0.0, 1.0], [1.0, 0.0]]), np.zeros(2), np.zeros(2))
        assert viterbi_decode(np.zeros((2, 2)), crf)[0] == [0, 1]

    @pytest.mark.parametrize("seed", range(40))
    @pytest.mark.parametrize("integer", [False, True], ids=["real", "ties"])
    def test_brute_force(self, seed, integer):
        rng = np.random.default_rng(seed)
        e, crf = random_crf(rng, int(rng.integers(1, 6)), int(rng.integers(2, 6)), integer)
        path, best = viterbi_decode(e, crf)
        ref_path, ref_best = brute_argmax(*as_lists(e, crf))
        assert path == ref_path
        assert best == pytest.approx(ref_best, abs=1e-10)
        assert best == pytest.approx(crf_score(e, crf, path), abs=1e-10)

    @pytest.mark.parametrize("seed", range(20))
    def test_masked_matches_constrained_brute_force(self, seed):
        tags = ("O", "B-PER", "I-PER", "B-LOC", "I-LOC")
        rng = np.random.default_rng(seed)
        e, crf = random_crf(rng, int(rng.integers(1, 5)), len(tags), integer=seed % 2 == 1)
        path, _ = viterbi_decode(e, crf, iob_mask(tags))
        legal = lambda p: not validate_iob([tags[k] for k in p])  # noqa: E731
        assert path == brute_argmax(*as_lists(e, crf), allowed=legal)[0]

    def test_legal_unmasked_path_survives_masking(self):
        rng = np.random.default_rng(11)
        mask = iob_mask(TAGS)
        for _ in range(200):
            e, crf = random_crf(rng, int(rng.integers(1, 6)), len(TAGS))
            free, _ = viterbi_decode(e, crf)
            if not validate_iob([TAGS[k] for k in free]):
                assert viterbi_decode(e, crf, mask)[0] == free

    def test_iob_mask_table(self):
        m = iob_mask(("O", "B-PER", "I-PER", "B-LOC", "I-LOC"))
        assert m.start.tolist() == [True, True, False, True, False]
        assert m.trans[:, 2].tolist() == [False, True, True, False, False]
        assert m.trans[:, 4].tolist() == [False, False, False, True, True]
        assert m.trans[:, [0, 1, 3]].all()


class TestLoss:
    def test_softmax_uniform(self):
        assert loss(np.zeros((2, 11)), "softmax", [0, 5]) == pytest.approx(2 * math.log(11), abs=1e-12)

    def test_crf_uniform(self):
        assert loss(np.zeros((3, 2)), "crf", [0, 1, 1], CrfParams.zeros(2)) == pytest.approx(
            3 * math.log(2), abs=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 10**6))
    def test_crf_nll_nonnegative(self, seed):
        rng = np.random.default_rng(seed)
        T, K = int(rng.integers(1, 6)), int(rng.integers(2, 6))
        e, crf = random_crf(rng, T, K)
        e *= 5
        gold = rng.integers(0, K, size=T).tolist()
        assert loss(e, "crf", gold, crf) >= -1e-9

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            loss(np.zeros((2, 3)), "softmax", [0])

    def test_unknown_head(self):
        with pytest.raises(ValueError):
            loss(np.zeros((2, 3)), "hmm", [0, 1])

    @pytest.mark.parametrize("head", ["softmax", "crf"])
    def test_gradients_match_finite_differences(self, head):
        rng = np.random.default_rng(12)
        e, crf = random_crf(rng, 4, 3)
        gold = [2, 0, 1, 1]
        _, d_e, d_crf = loss_and_grad(e, head, gold, crf)
        eps = 1e-6
        arrays = [(e, d_e)] + ([] if head == "softmax" else
                               [(crf.trans, d_crf.trans), (crf.start, d_crf.start), (crf.stop, d_crf.stop)])
        for arr, grad in arrays:
            for idx in np.ndindex(arr.shape):
                old = arr[idx]
                arr[idx] = old + eps
                up = loss(e, head, gold, crf)
                arr[idx] = old - eps
                down = loss(e, head, gold, crf)
                arr[idx] = old
                assert grad[idx] == pytest.approx((up - down) / (2 * eps), abs=1e-8)
