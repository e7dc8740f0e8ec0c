import numpy as np
import pandas as pd
from django.test import SimpleTestCase, tag
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import expit

from core.exceptions import (
    AlignmentError,
    DivergenceError,
    InsufficientDataError,
    OilsignalError,
)
from learning.neural import (
    LstmNetwork,
    LstmSignalModel,
    TrainConfig,
    WindowDataset,
    backward,
    build_model,
    build_windows,
    forward,
    predict,
    predict_signals,
    train,
)
from market.indicators import build_features
from market.series import ScalingMetadata
from market.tests.samples import sample_prices


def zeroed(model):
    return model.with_parameters(
        {name: np.zeros_like(array) for name, array in model.parameters().items()}
    )


def numeric_gradients(model, window, target, step=1e-6):
    gradients = {}
    for name, array in model.parameters().items():
        grad = np.zeros_like(array)
        for index in np.ndindex(array.shape):
            original = array[index]
            array[index] = original + step
            plus = (forward(model, window)[0] - target) ** 2
            array[index] = original - step
            minus = (forward(model, window)[0] - target) ** 2
            array[index] = original
            grad[index] = (plus - minus) / (2 * step)
        gradients[name] = grad
    return gradients


class WindowTests(SimpleTestCase):
    def test_counts(self):
        dataset = build_windows(np.arange(10.0), lag=3)

        self.assertEqual(len(dataset), 7)
        self.assertEqual(dataset.lag, 3)
        self.assertEqual(dataset.inputs[0].tolist(), [0.0, 1.0, 2.0])
        self.assertEqual(dataset.targets[0], 3.0)
        self.assertEqual(dataset.inputs[-1].tolist(), [6.0, 7.0, 8.0])
        self.assertEqual(dataset.targets[-1], 9.0)

    def test_default_lag(self):
        self.assertEqual(len(build_windows(np.arange(100.0))), 61)

    def test_too_short(self):
        with self.assertRaises(InsufficientDataError):
            build_windows(np.arange(5.0), lag=5)


class ForwardTests(SimpleTestCase):
    def test_zero_model_predicts_zero(self):
        model = zeroed(build_model((4, 3), (2,)))

        prediction, _ = forward(model, np.linspace(0, 1, 7))

        self.assertEqual(prediction, 0.0)

    def test_single_step_by_hand(self):
        model = build_model((1,), (), seed=3)
        x = 0.7
        W, b = model.lstm[0].W, model.lstm[0].b
        dense = model.dense[0]

        z = W @ np.array([x, 0.0]) + b
        i, f, g, o = expit(z[0]), expit(z[1]), np.tanh(z[2]), expit(z[3])
        cell = f * 0.0 + i * g
        h = o * np.tanh(cell)
        expected = dense.W[0, 0] * h + dense.b[0]

        prediction, _ = forward(model, [x])
        self.assertAlmostEqual(prediction, expected, places=12)

    def test_initialization(self):
        model = build_model((4,), (2,), seed=1)

        bias = model.lstm[0].b
        self.assertEqual(bias[4:8].tolist(), [1.0] * 4)
        self.assertEqual(bias[:4].tolist(), [0.0] * 4)
        self.assertLessEqual(np.abs(model.lstm[0].W).max(), 1 / np.sqrt(5))
        self.assertEqual(
            list(model.parameters()),
            ["lstm1.W", "lstm1.b", "dense1.W", "dense1.b", "dense2.W", "dense2.b"],
        )

    @given(
        st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=30),
        st.floats(0.1, 50.0),
        st.integers(0, 1000),
    )
    @settings(max_examples=50, deadline=None)
    def test_hidden_states_stay_bounded(self, window, gain, seed):
        model = build_model((5, 3), (2,), seed=seed)
        model = model.with_parameters(
            {name: gain * array for name, array in model.parameters().items()}
        )

        _, cache = forward(model, window)

        for layer in cache.lstm:
            hidden = layer.gates.shape[1] // 4
            states = layer.gates[:, 3 * hidden:] * layer.tanh_cells
            self.assertTrue(np.isfinite(states).all())
            self.assertLessEqual(np.abs(states).max(), 1.0)
            self.assertLessEqual(np.abs(layer.tanh_cells).max(), 1.0)

    def test_dimension_mismatch(self):
        model = build_model((2,), (), input_size=2)

        with self.assertRaises(ValueError):
            forward(model, np.zeros(5))


class GradientTests(SimpleTestCase):
    def assertGradientsMatch(self, model, window, target):
        _, cache = forward(model, window)
        analytic = backward(model, cache, target)
        numeric = numeric_gradients(model.copy(), window, target)

        self.assertEqual(set(analytic), set(numeric))
        for name in analytic:
            scale = max(1.0, np.abs(numeric[name]).max())
            np.testing.assert_allclose(
                analytic[name] / scale, numeric[name] / scale, atol=1e-6, err_msg=name
            )

    def test_two_layer_network(self):
        model = build_model((4, 3), (2,), seed=5)
        window = np.random.default_rng(0).uniform(0, 1, 5)

        self.assertGradientsMatch(model, window, 0.3)

    def test_tiny_network(self):
        model = build_model((2, 2), (), seed=6)

        self.assertGradientsMatch(model, [0.2, -0.4, 0.9], -0.5)


class TrainTests(SimpleTestCase):
    def small_config(self, **changes):
        options = {
            "epochs": 5,
            "learning_rate": 0.01,
            "hidden_sizes": (6,),
            "dense_sizes": (),
        }
        options.update(changes)
        return TrainConfig(**options)

    def test_constant_target_loss_falls(self):
        dataset = WindowDataset(np.full((30, 5), 0.5), np.full(30, 0.5))

        result = train(dataset, self.small_config())

        self.assertEqual(len(result.losses), 5)
        self.assertLess(result.losses[-1], result.losses[0])

    def test_seeded_training_is_reproducible(self):
        dataset = build_windows(np.sin(np.linspace(0, 6, 40)), lag=5)

        first = train(dataset, self.small_config(epochs=2))
        second = train(dataset, self.small_config(epochs=2))

        self.assertEqual(first.losses, second.losses)
        for name, array in first.model.parameters().items():
            np.testing.assert_array_equal(array, second.model.parameters()[name])

    def test_trained_model_is_frozen(self):
        dataset = build_windows(np.linspace(0, 1, 20), lag=4)
        initial = build_model((6,), (), seed=42)

        result = train(dataset, self.small_config(epochs=1), model=initial)

        self.assertFalse(result.model.lstm[0].W.flags.writeable)
        self.assertFalse(np.array_equal(result.model.lstm[0].W, initial.lstm[0].W))

    def test_divergence(self):
        dataset = WindowDataset(np.zeros((3, 4)), np.array([0.0, np.inf, 0.0]))

        with self.assertRaises(DivergenceError) as raised:
            train(dataset, self.small_config())

        self.assertEqual((raised.exception.epoch, raised.exception.sample), (1, 1))

    def test_batch_size(self):
        with self.assertRaises(ValueError):
            TrainConfig(batch_size=32)

    @tag("slow")
    def test_sine_wave(self):
        values = 0.5 + 0.4 * np.sin(np.linspace(0, 12 * np.pi, 400))
        dataset = build_windows(values, lag=10)

        result = train(dataset, self.small_config(epochs=20, hidden_sizes=(16,)))

        errors = predict(result.model, dataset.inputs) - dataset.targets
        self.assertLess(np.mean(errors**2), 0.01)


class SignalTests(SimpleTestCase):
    def test_inverse_scaled_comparison(self):
        model = zeroed(build_model((2,), ()))
        scaling = ScalingMetadata({"close": (10.0, 20.0)})

        signals = predict_signals(
            model,
            np.zeros((2, 3)),
            scaling,
            [9.0, 11.0],
            pd.bdate_range("2021-03-01", periods=2),
        )

        self.assertEqual(signals.values.tolist(), [1, 0])

    def test_missing_scaling(self):
        model = build_model((2,), ())

        with self.assertRaises(OilsignalError):
            predict_signals(model, np.zeros((1, 3)), None, [1.0], pd.bdate_range(
                "2021-03-01", periods=1
            ))

    def test_parameter_document(self):
        model = build_model((3, 2), (2,), seed=9)

        restored = LstmNetwork.from_dict(model.to_dict())

        window = np.linspace(0, 1, 6)
        self.assertAlmostEqual(forward(restored, window)[0], forward(model, window)[0])


class LstmSignalModelTests(SimpleTestCase):
    def setUp(self):
        self.prices = sample_prices(n=160, seed=4)
        self.frame = build_features(self.prices)
        self.config = TrainConfig(epochs=1, hidden_sizes=(4,), dense_sizes=())

    def test_fit_and_predict(self):
        train_rows = self.frame.take(np.arange(100))
        test_rows = self.frame.take(np.arange(100, len(self.frame)))
        model = LstmSignalModel(self.prices.close, self.config, lag=10)

        signals = model.fit(train_rows).predict(test_rows)

        self.assertEqual(len(signals), len(test_rows))
        document = model.to_dict()
        self.assertEqual(document["lag"], 10)
        self.assertEqual(len(document["losses"]), 1)
        closes = train_rows.column("close")
        self.assertEqual(document["scaling"]["close"], [closes.min(), closes.max()])

    def test_window_needs_history(self):
        model = LstmSignalModel(self.prices.close, self.config, lag=39)

        with self.assertRaises(InsufficientDataError):
            model.fit(self.frame)

    def test_unknown_dates(self):
        model = LstmSignalModel(self.prices.close.iloc[:100], self.config, lag=10)

        with self.assertRaises(AlignmentError):
            model.fit(self.frame)
