import numpy as np
import pandas as pd
from django.test import SimpleTestCase

from core.exceptions import ConvergenceError, InsufficientDataError
from learning.base import price_signals
from learning.svr import (
    KernelRows,
    SvrConfig,
    SvrSignalModel,
    rbf_kernel,
    svr_fit_arrays,
    svr_predict_signals,
    svr_train,
)
from learning.tests.samples import sample_labeled


def sample_problem(n=200, features=4, seed=0, noise=0.1):
    rng = np.random.default_rng(seed)
    X = rng.uniform(0, 1, (n, features))
    z = np.sin(3 * X.sum(axis=1)) + rng.normal(0, noise, n)
    return X, z


def full_coefficients(model, X):
    coefficients = np.zeros(len(X))
    for vector, value in zip(model.support_vectors, model.coefficients):
        index = np.flatnonzero((X == vector).all(axis=1))[0]
        coefficients[index] = value
    return coefficients


class SvrSolverTests(SimpleTestCase):
    def test_constant_labels(self):
        X, _ = sample_problem(n=20)

        model = svr_fit_arrays(X, np.full(20, 3.5), SvrConfig(C=1, epsilon=0.1))

        self.assertEqual(model.n_support, 0)
        self.assertAlmostEqual(model.bias, 3.5)
        np.testing.assert_allclose(model.predict(X[:3]), 3.5)

    def test_tube_contains_smooth_target(self):
        X = np.linspace(0, 3, 25)[:, None]
        z = np.sin(X[:, 0])
        config = SvrConfig(C=1000, epsilon=0.05, gamma=1.0, tol=1e-9)

        model = svr_fit_arrays(X, z, config)

        residuals = np.abs(model.predict(X) - z)
        self.assertTrue((residuals <= 0.05 + 1e-6).all())

    def test_kkt_conditions(self):
        X, z = sample_problem()
        config = SvrConfig(C=1.0, epsilon=0.1, tol=1e-4)

        model = svr_fit_arrays(X, z, config)

        coefficients = full_coefficients(model, X)
        residual = z - model.predict(X)
        slack = 1e-3
        bound = np.abs(coefficients) >= config.C - 1e-12
        free = (coefficients != 0) & ~bound
        inactive = coefficients == 0

        self.assertTrue((np.abs(coefficients) <= config.C + 1e-12).all())
        self.assertAlmostEqual(coefficients.sum(), 0.0, delta=1e-6)
        self.assertTrue((np.abs(residual[inactive]) <= config.epsilon + slack).all())
        np.testing.assert_allclose(
            np.abs(residual[free]), config.epsilon, atol=slack
        )
        np.testing.assert_array_equal(
            np.sign(residual[free]), np.sign(coefficients[free])
        )
        self.assertTrue(
            (np.abs(residual[bound]) >= config.epsilon - slack).all()
        )
        self.assertLess(model.violation, config.tol)

    def test_objective_never_decreases(self):
        X, z = sample_problem(n=80, seed=1)

        model = svr_fit_arrays(
            X, z, SvrConfig(C=5.0, epsilon=0.05), record_objective=True
        )

        trace = np.array(model.objective_trace)
        self.assertEqual(len(trace), model.iterations)
        self.assertTrue((np.diff(trace) >= -1e-9).all())

    def test_iteration_cap(self):
        X, z = sample_problem(n=100, seed=2)

        with self.assertRaises(ConvergenceError) as raised:
            svr_fit_arrays(X, z, SvrConfig(C=10.0, epsilon=0.01, max_iter=3))

        self.assertGreater(raised.exception.residual, 0)

    def test_tiny_cache(self):
        X, z = sample_problem(n=60, seed=3)
        config = SvrConfig(C=2.0, epsilon=0.05)

        roomy = svr_fit_arrays(X, z, config)
        cramped = svr_fit_arrays(X, z, SvrConfig(C=2.0, epsilon=0.05, cache_size=1e-6))

        np.testing.assert_allclose(roomy.predict(X), cramped.predict(X))

    def test_single_row(self):
        with self.assertRaises(InsufficientDataError):
            svr_fit_arrays(np.ones((1, 2)), [1.0])

    def test_non_finite_labels(self):
        with self.assertRaises(ValueError):
            svr_fit_arrays(np.eye(3), [1.0, np.nan, 2.0])


class KernelTests(SimpleTestCase):
    def test_rbf_values(self):
        kernel = rbf_kernel(np.array([[0.0, 0.0]]), np.array([[1.0, 1.0]]), 0.5)

        self.assertAlmostEqual(kernel[0, 0], np.exp(-1.0))

    def test_row_cache_evicts_oldest(self):
        rows = KernelRows(np.eye(4), 1.0, cache_size=1e-9)

        for index in range(4):
            rows[index]

        self.assertEqual(rows.capacity, 2)
        self.assertEqual(list(rows.rows), [2, 3])
        expected = rbf_kernel(np.eye(4)[:1], np.eye(4), 1.0)[0]
        np.testing.assert_allclose(rows[0], expected)

    def test_gamma_resolution(self):
        X = np.random.default_rng(0).uniform(0, 1, (10, 4))

        self.assertEqual(SvrConfig().resolve_gamma(X), 0.25)
        self.assertAlmostEqual(
            SvrConfig(gamma="scale").resolve_gamma(X), 1 / (4 * X.var())
        )
        self.assertEqual(SvrConfig(gamma=2.0).resolve_gamma(X), 2.0)
        with self.assertRaises(ValueError):
            SvrConfig(gamma="tiny")


class SvrSignalTests(SimpleTestCase):
    def test_signals_follow_predicted_price(self):
        signals = price_signals(
            pd.bdate_range("2020-01-01", periods=3),
            [51.0, 49.0, -1.0],
            [50.0, 50.0, 50.0],
        )

        self.assertEqual(signals.values.tolist(), [1, 0, 0])

    def test_constant_model_signals(self):
        frame = sample_labeled(n=10)
        model = svr_fit_arrays(frame.X, np.full(10, 50.0), SvrConfig(epsilon=0.1))

        signals = svr_predict_signals(model, frame)

        expected = (frame.column("close") < 50.0).astype(int)
        self.assertEqual(signals.values.tolist(), expected.tolist())

    def test_model_wrapper(self):
        frame = sample_labeled(n=120, features=4, seed=4)
        train, test = frame.take(np.arange(100)), frame.take(np.arange(100, 120))

        model = SvrSignalModel(SvrConfig(C=19, epsilon=0.5)).fit(train)

        self.assertEqual(len(model.predict(test)), 20)
        self.assertEqual(model.predict_close(test).shape, (20,))
        document = model.to_dict()
        self.assertEqual(document["config"]["C"], 19)
        self.assertEqual(len(document["coefficients"]), model.model_.n_support)

    def test_train_on_named_label(self):
        frame = sample_labeled(n=30)

        model = svr_train(frame, SvrConfig(epsilon=1000.0))

        self.assertEqual(model.n_support, 0)
        labels = frame.column("next_close")
        self.assertAlmostEqual(model.bias, (labels.max() + labels.min()) / 2)
