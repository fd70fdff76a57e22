import math

import numpy as np
import pytest

from iuq.input_models import (
    EstimationError,
    IndependentExponentials,
    InputTrace,
    MultivariateNormalKnownCov,
)


class TestExponentialSampling:
    def test_draws_positive(self, rng):
        model = IndependentExponentials(1)
        draws = model.sample(np.array([1.0]), rng, size=10_000)
        assert np.all(draws > 0)

    def test_sample_mean_matches_rate(self, rng):
        model = IndependentExponentials(1)
        draws = model.sample(np.array([2.0]), rng, size=1_000_000)
        se = 0.5 / math.sqrt(draws.size)
        assert abs(draws.mean() - 0.5) < 3 * se

    def test_rejects_nonpositive_rate(self, rng):
        model = IndependentExponentials(2)
        with pytest.raises(ValueError):
            model.sample(np.array([1.0, -0.5]), rng, size=3)

    def test_single_draw_shape(self, rng):
        model = IndependentExponentials(3)
        assert model.sample(np.ones(3), rng).shape == (3,)


class TestMvnSampling:
    def test_sample_covariance_identity(self, rng):
        model = MultivariateNormalKnownCov(np.eye(2))
        draws = model.sample(np.zeros(2), rng, size=1_000_000)
        cov = np.cov(draws.T)
        assert np.max(np.abs(cov - np.eye(2))) < 0.01

    def test_requires_positive_definite_cov(self):
        with pytest.raises(np.linalg.LinAlgError):
            MultivariateNormalKnownCov(np.array([[1.0, 2.0], [2.0, 1.0]]))


class TestLogPdf:
    def test_exponential_at_zero_boundary(self):
        model = IndependentExponentials(1)
        assert model.log_pdf(np.array([1.0]), np.array([0.0])) == pytest.approx(0.0)

    def test_exponential_rate_two(self):
        model = IndependentExponentials(1)
        got = model.log_pdf(np.array([2.0]), np.array([1.0]))
        assert got == pytest.approx(math.log(2.0) - 2.0)

    def test_standard_normal_at_mode(self):
        model = MultivariateNormalKnownCov(np.eye(1))
        got = model.log_pdf(np.zeros(1), np.zeros(1))
        assert got == pytest.approx(-0.5 * math.log(2.0 * math.pi))

    def test_outside_support_is_minus_inf(self):
        model = IndependentExponentials(2)
        assert model.log_pdf(np.ones(2), np.array([1.0, -0.1])) == -np.inf


class TestMle:
    def test_exponential_inverse_mean(self):
        model = IndependentExponentials(1)
        assert model.mle(np.array([1.0, 2.0, 3.0])) == pytest.approx([0.5])

    def test_mvn_sample_mean(self):
        model = MultivariateNormalKnownCov(np.eye(2))
        got = model.mle(np.array([[1.0, 2.0], [3.0, 4.0]]))
        assert got == pytest.approx([2.0, 3.0])

    def test_constant_exponential_data(self):
        model = IndependentExponentials(1)
        assert model.mle(np.full(7, 4.0)) == pytest.approx([0.25])

    def test_empty_data_errors(self):
        model = IndependentExponentials(1)
        with pytest.raises(EstimationError):
            model.mle(np.empty((0, 1)))

    def test_nonpositive_exponential_data_errors(self):
        model = IndependentExponentials(1)
        with pytest.raises(EstimationError):
            model.mle(np.array([1.0, 0.0]))

    def test_mle_converges_to_truth(self, rng):
        model = IndependentExponentials(2)
        truth = np.array([0.7, 1.9])
        errs = []
        for m in (100, 10_000, 1_000_000):
            reps = [
                np.linalg.norm(model.mle(model.sample(truth, rng, size=m)) - truth)
                for _ in range(8)
            ]
            errs.append(np.mean(reps))
        assert errs[0] > errs[1] > errs[2]


def _exp_trace(draws):
    return InputTrace(tuple(np.atleast_1d(np.asarray(b, dtype=float)) for b in draws))


class TestLogLr:
    def test_identical_parameters_give_zero(self, rng):
        model = IndependentExponentials(2)
        trace = _exp_trace([rng.exponential(1.0, size=4), rng.exponential(1.0, size=2)])
        theta = np.array([0.5, 1.5])
        assert model.log_lr(trace, theta, theta) == pytest.approx(0.0)

    def test_single_draw_direct_ratio(self):
        model = IndependentExponentials(1)
        trace = _exp_trace([[1.0]])
        got = model.log_lr(trace, np.array([1.0]), np.array([2.0]))
        assert got == pytest.approx(math.log(2.0) - 1.0)

    def test_antisymmetry(self, rng):
        model = IndependentExponentials(2)
        for _ in range(25):
            trace = _exp_trace(
                [rng.exponential(1.0, size=rng.integers(1, 6)) for _ in range(2)]
            )
            a = rng.uniform(0.2, 3.0, size=2)
            b = rng.uniform(0.2, 3.0, size=2)
            assert model.log_lr(trace, a, b) == pytest.approx(-model.log_lr(trace, b, a))
            assert model.log_lr(trace, a, a) == 0.0

    def test_expected_weight_is_one(self, rng):
        # E[W] = 1 under the sampling measure, checked brute force
        model = IndependentExponentials(1)
        theta, target = 1.0, 2.0
        z = rng.exponential(1.0 / theta, size=1_000_000)
        w = np.exp(math.log(target / theta) - (target - theta) * z)
        se = w.std(ddof=1) / math.sqrt(w.size)
        assert abs(w.mean() - 1.0) < 3 * se

    def test_change_of_measure_reweights_test_function(self, rng):
        # E[g(Z) W] under theta equals E[g(Z)] under the target, g = sum
        model = IndependentExponentials(1)
        theta, target, s = 1.0, 1.3, 4
        z = rng.exponential(1.0 / theta, size=(400_000, s))
        g = z.sum(axis=1)
        log_w = model.log_weights(
            np.full((z.shape[0], 1), float(s)), g[:, None], np.array([theta]), np.array([target])
        )
        vals = g * np.exp(log_w)
        se = vals.std(ddof=1) / math.sqrt(vals.size)
        assert abs(vals.mean() - s / target) < 3 * se

    def test_batch_matches_per_trace(self, rng):
        model = IndependentExponentials(3)
        target = rng.uniform(0.5, 2.0, size=3)
        froms = rng.uniform(0.5, 2.0, size=(8, 3))
        counts = rng.integers(1, 5, size=(8, 3)).astype(float)
        sums = counts * rng.uniform(0.3, 2.0, size=(8, 3))
        batch = model.log_weights(counts, sums, froms, target)
        for i in range(8):
            blocks = []
            for c in range(3):
                k = int(counts[i, c])
                vals = np.full(k, sums[i, c] / k)
                blocks.append(vals)
            single = model.log_lr(InputTrace(tuple(blocks)), froms[i], target)
            assert single == pytest.approx(batch[i])

    def test_mvn_batch_matches_per_trace(self, rng):
        cov = np.array([[1.0, 0.3], [0.3, 2.0]])
        model = MultivariateNormalKnownCov(cov)
        target = np.array([0.4, -0.2])
        for _ in range(10):
            frm = rng.normal(size=2)
            draws = model.sample(frm, rng, size=int(rng.integers(1, 5)))
            trace = InputTrace((draws,))
            counts, sums = model.trace_stats(trace)
            direct = sum(
                model.log_pdf(target, z) - model.log_pdf(frm, z) for z in draws
            )
            assert model.log_lr(trace, frm, target) == pytest.approx(direct)
            batch = model.log_weights(counts[None, :], sums[None, :], frm[None, :], target)
            assert batch[0] == pytest.approx(direct)


class TestInputTrace:
    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            InputTrace((np.empty(0),))

    def test_size_counts_all_blocks(self):
        trace = _exp_trace([[1.0, 2.0], [3.0]])
        assert trace.size == 3
