"""
Stacked LSTM regressor for next-day closes, trained with Adam.

The network reads a window of scaled closes. Every LSTM layer runs over
the whole window; the dense head reads the final hidden state of the top
layer. Gates are stacked as [input, forget, cell, output] in one weight
matrix per layer acting on the concatenation [x_t, h_{t-1}].
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import pandas as pd
from numpy.lib.stride_tricks import sliding_window_view
from scipy.special import expit

from core.exceptions import (
    AlignmentError,
    ConstantSeriesError,
    DivergenceError,
    InsufficientDataError,
    OilsignalError,
)
from learning.base import price_signals, scaling_bounds
from market.series import LabeledFrame, ScalingMetadata, SignalSeries

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 5
    batch_size: int = 1
    learning_rate: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    seed: int = 42
    hidden_sizes: tuple[int, ...] = (128, 64)
    dense_sizes: tuple[int, ...] = (25,)

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if self.batch_size != 1:
            raise ValueError("only per-sample updates (batch_size=1) are supported")
        if not self.hidden_sizes:
            raise ValueError("at least one LSTM layer is required")


@dataclass(frozen=True, eq=False)
class WindowDataset:
    inputs: np.ndarray
    targets: np.ndarray

    def __post_init__(self):
        if len(self.inputs) != len(self.targets):
            raise ValueError("inputs and targets differ in length")

    def __len__(self) -> int:
        return len(self.targets)

    @property
    def lag(self) -> int:
        return self.inputs.shape[1]

    def take(self, positions) -> WindowDataset:
        positions = np.asarray(positions)
        return WindowDataset(self.inputs[positions], self.targets[positions])


def build_windows(values, lag: int = 39) -> WindowDataset:
    """window_i = values[i:i+lag], target_i = values[i+lag]."""
    values = np.asarray(values, dtype=float)
    if lag < 1:
        raise ValueError("lag must be >= 1")
    if len(values) <= lag:
        raise InsufficientDataError(
            f"{len(values)} values cannot fill a window of {lag} plus a target"
        )
    inputs = sliding_window_view(values, lag)[: len(values) - lag]
    return WindowDataset(np.array(inputs), values[lag:].copy())


@dataclass(frozen=True, eq=False)
class LstmLayer:
    W: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        if self.W.ndim != 2 or self.W.shape[0] % 4 or self.b.shape != (
            self.W.shape[0],
        ):
            raise ValueError("LSTM weights must be (4H, I+H) with a 4H bias")

    @property
    def hidden_size(self) -> int:
        return self.W.shape[0] // 4

    @property
    def input_size(self) -> int:
        return self.W.shape[1] - self.hidden_size


@dataclass(frozen=True, eq=False)
class DenseLayer:
    W: np.ndarray
    b: np.ndarray
    activation: str = "identity"

    def __post_init__(self):
        if self.b.shape != (self.W.shape[0],):
            raise ValueError("dense bias must match the output size")
        if self.activation != "identity":
            raise ValueError("dense layers are linear")


@dataclass(frozen=True, eq=False)
class LstmNetwork:
    lstm: tuple[LstmLayer, ...]
    dense: tuple[DenseLayer, ...]

    @property
    def input_size(self) -> int:
        return self.lstm[0].input_size

    def parameters(self) -> dict[str, np.ndarray]:
        """Named parameter arrays, shared with the network (not copies)."""
        named = {}
        for index, layer in enumerate(self.lstm, 1):
            named[f"lstm{index}.W"] = layer.W
            named[f"lstm{index}.b"] = layer.b
        for index, layer in enumerate(self.dense, 1):
            named[f"dense{index}.W"] = layer.W
            named[f"dense{index}.b"] = layer.b
        return named

    def with_parameters(self, named: dict[str, np.ndarray]) -> LstmNetwork:
        return LstmNetwork(
            tuple(
                LstmLayer(named[f"lstm{k}.W"], named[f"lstm{k}.b"])
                for k in range(1, len(self.lstm) + 1)
            ),
            tuple(
                DenseLayer(named[f"dense{k}.W"], named[f"dense{k}.b"])
                for k in range(1, len(self.dense) + 1)
            ),
        )

    def copy(self, writeable: bool = True) -> LstmNetwork:
        named = {}
        for name, array in self.parameters().items():
            named[name] = array.copy()
            named[name].flags.writeable = writeable
        return self.with_parameters(named)

    def to_dict(self) -> dict:
        return {
            name: {"shape": list(array.shape), "values": array.ravel().tolist()}
            for name, array in self.parameters().items()
        }

    @classmethod
    def from_dict(cls, data: dict) -> LstmNetwork:
        named = {
            name: np.asarray(entry["values"], dtype=float).reshape(entry["shape"])
            for name, entry in data.items()
        }
        n_lstm = sum(1 for name in named if name.startswith("lstm") and "W" in name)
        n_dense = len(named) // 2 - n_lstm
        skeleton = cls(
            tuple(LstmLayer(np.zeros((4, 2)), np.zeros(4)) for _ in range(n_lstm)),
            tuple(DenseLayer(np.zeros((1, 1)), np.zeros(1)) for _ in range(n_dense)),
        )
        return skeleton.with_parameters(named)


def build_model(
    hidden_sizes: Sequence[int] = (128, 64),
    dense_sizes: Sequence[int] = (25,),
    input_size: int = 1,
    seed: int = 42,
) -> LstmNetwork:
    """Uniform(+-1/sqrt(fan_in)) weights, zero biases, forget bias 1."""
    rng = np.random.default_rng(seed)
    lstm = []
    previous = input_size
    for hidden in hidden_sizes:
        fan_in = previous + hidden
        bound = 1.0 / np.sqrt(fan_in)
        b = np.zeros(4 * hidden)
        b[hidden: 2 * hidden] = 1.0
        lstm.append(
            LstmLayer(rng.uniform(-bound, bound, (4 * hidden, fan_in)), b)
        )
        previous = hidden
    dense = []
    for size in (*dense_sizes, 1):
        bound = 1.0 / np.sqrt(previous)
        dense.append(
            DenseLayer(rng.uniform(-bound, bound, (size, previous)), np.zeros(size))
        )
        previous = size
    return LstmNetwork(tuple(lstm), tuple(dense))


@dataclass(eq=False)
class LstmCache:
    xh: np.ndarray
    gates: np.ndarray
    # cells[t] is c_{t-1}; cells[0] is the zero initial state
    cells: np.ndarray
    tanh_cells: np.ndarray


@dataclass(eq=False)
class ForwardCache:
    lstm: list[LstmCache] = field(default_factory=list)
    dense_inputs: list[np.ndarray] = field(default_factory=list)
    prediction: float = 0.0


def _lstm_forward(layer: LstmLayer, sequence: np.ndarray):
    steps, width = sequence.shape
    H = layer.hidden_size
    xh = np.zeros((steps, width + H))
    gates = np.empty((steps, 4 * H))
    cells = np.zeros((steps + 1, H))
    tanh_cells = np.empty((steps, H))
    outputs = np.empty((steps, H))
    h = np.zeros(H)
    for t in range(steps):
        xh[t, :width] = sequence[t]
        xh[t, width:] = h
        z = layer.W @ xh[t] + layer.b
        gates[t, : 2 * H] = expit(z[: 2 * H])
        gates[t, 2 * H: 3 * H] = np.tanh(z[2 * H: 3 * H])
        gates[t, 3 * H:] = expit(z[3 * H:])
        i, f, g, o = np.split(gates[t], 4)
        cells[t + 1] = f * cells[t] + i * g
        tanh_cells[t] = np.tanh(cells[t + 1])
        h = o * tanh_cells[t]
        outputs[t] = h
    return outputs, LstmCache(xh, gates, cells, tanh_cells)


def forward(model: LstmNetwork, window) -> tuple[float, ForwardCache]:
    sequence = np.asarray(window, dtype=float)
    if sequence.ndim == 1:
        sequence = sequence[:, None]
    if sequence.ndim != 2 or sequence.shape[1] != model.input_size:
        raise ValueError(
            f"window of shape {sequence.shape} does not match "
            f"input size {model.input_size}"
        )
    cache = ForwardCache()
    for layer in model.lstm:
        sequence, layer_cache = _lstm_forward(layer, sequence)
        cache.lstm.append(layer_cache)
    activation = sequence[-1]
    for layer in model.dense:
        cache.dense_inputs.append(activation)
        activation = layer.W @ activation + layer.b
    cache.prediction = float(activation[0])
    return cache.prediction, cache


def _lstm_backward(layer: LstmLayer, cache: LstmCache, dh_sequence: np.ndarray):
    steps = len(dh_sequence)
    H = layer.hidden_size
    width = layer.input_size
    dZ = np.empty((steps, 4 * H))
    dx = np.empty((steps, width))
    dh_next = np.zeros(H)
    dc_next = np.zeros(H)
    for t in reversed(range(steps)):
        i, f, g, o = np.split(cache.gates[t], 4)
        tanh_c = cache.tanh_cells[t]
        dh = dh_sequence[t] + dh_next
        dc = dc_next + dh * o * (1.0 - tanh_c**2)
        dZ[t, :H] = dc * g * i * (1.0 - i)
        dZ[t, H: 2 * H] = dc * cache.cells[t] * f * (1.0 - f)
        dZ[t, 2 * H: 3 * H] = dc * i * (1.0 - g**2)
        dZ[t, 3 * H:] = dh * tanh_c * o * (1.0 - o)
        dc_next = dc * f
        dxh = layer.W.T @ dZ[t]
        dx[t] = dxh[:width]
        dh_next = dxh[width:]
    return dZ.T @ cache.xh, dZ.sum(axis=0), dx


def backward(
    model: LstmNetwork, cache: ForwardCache, target: float
) -> dict[str, np.ndarray]:
    """Exact gradients of (prediction - target)^2 by full BPTT."""
    gradients = {}
    delta = np.array([2.0 * (cache.prediction - target)])
    for index in reversed(range(len(model.dense))):
        layer = model.dense[index]
        gradients[f"dense{index + 1}.W"] = np.outer(delta, cache.dense_inputs[index])
        gradients[f"dense{index + 1}.b"] = delta.copy()
        delta = layer.W.T @ delta

    steps = len(cache.lstm[-1].gates)
    dh_sequence = np.zeros((steps, model.lstm[-1].hidden_size))
    dh_sequence[-1] = delta
    for index in reversed(range(len(model.lstm))):
        dW, db, dh_sequence = _lstm_backward(
            model.lstm[index], cache.lstm[index], dh_sequence
        )
        gradients[f"lstm{index + 1}.W"] = dW
        gradients[f"lstm{index + 1}.b"] = db
    return gradients


class Adam:
    def __init__(self, parameters: dict[str, np.ndarray], config: TrainConfig):
        self.config = config
        self.m = {name: np.zeros_like(p) for name, p in parameters.items()}
        self.v = {name: np.zeros_like(p) for name, p in parameters.items()}
        self.t = 0

    def step(self, parameters: dict[str, np.ndarray], gradients: dict[str, np.ndarray]):
        c = self.config
        self.t += 1
        correction1 = 1.0 - c.beta1**self.t
        correction2 = 1.0 - c.beta2**self.t
        for name, param in parameters.items():
            grad = gradients[name]
            m, v = self.m[name], self.v[name]
            m *= c.beta1
            m += (1.0 - c.beta1) * grad
            v *= c.beta2
            v += (1.0 - c.beta2) * grad**2
            param -= c.learning_rate * (m / correction1) / (
                np.sqrt(v / correction2) + c.epsilon
            )


@dataclass(frozen=True, eq=False)
class TrainingResult:
    model: LstmNetwork
    losses: tuple[float, ...]


def train(
    dataset: WindowDataset,
    config: Optional[TrainConfig] = None,
    model: Optional[LstmNetwork] = None,
) -> TrainingResult:
    """Adam, one update per window, windows in chronological order."""
    config = config or TrainConfig()
    if not len(dataset):
        raise InsufficientDataError("training needs at least one window")
    if model is None:
        model = build_model(config.hidden_sizes, config.dense_sizes, seed=config.seed)
    working = model.copy()
    parameters = working.parameters()
    optimizer = Adam(parameters, config)

    losses = []
    for epoch in range(1, config.epochs + 1):
        total = 0.0
        for sample, (window, target) in enumerate(
            zip(dataset.inputs, dataset.targets)
        ):
            prediction, cache = forward(working, window)
            loss = (prediction - target) ** 2
            if not np.isfinite(loss):
                raise DivergenceError(epoch, sample)
            optimizer.step(parameters, backward(working, cache, target))
            total += loss
        losses.append(total / len(dataset))
        logger.info("LSTM epoch %d/%d loss %.6f", epoch, config.epochs, losses[-1])
    return TrainingResult(working.copy(writeable=False), tuple(losses))


def predict(model: LstmNetwork, inputs) -> np.ndarray:
    return np.array([forward(model, window)[0] for window in np.asarray(inputs)])


def predict_signals(
    model: LstmNetwork,
    inputs,
    scaling: Optional[ScalingMetadata],
    last_closes,
    dates: pd.DatetimeIndex,
) -> SignalSeries:
    """Inverse-scaled predicted close against the last actual close, 1/0."""
    if scaling is None or "close" not in scaling.bounds:
        raise OilsignalError("close scaling metadata is missing")
    if isinstance(inputs, WindowDataset):
        inputs = inputs.inputs
    predicted = scaling.invert("close", predict(model, inputs))
    return price_signals(dates, predicted, last_closes)


class LstmSignalModel:
    """
    Windows are read from the full close history, so every feature row
    with ``lag`` closes behind it gets a prediction.
    """

    name = "lstm"

    def __init__(
        self, history: pd.Series, config: Optional[TrainConfig] = None, lag: int = 39
    ):
        self.history = history
        self.config = config or TrainConfig()
        self.lag = lag
        self.scaling_: Optional[ScalingMetadata] = None
        self.result_: Optional[TrainingResult] = None

    def _window_index(self, frame: LabeledFrame) -> np.ndarray:
        positions = self.history.index.get_indexer(frame.dates)
        if (positions < 0).any():
            raise AlignmentError("frame dates are missing from the close history")
        if positions.min() < self.lag - 1:
            raise InsufficientDataError(
                f"rows need {self.lag - 1} earlier closes for an LSTM window"
            )
        return positions - self.lag + 1

    def _windows(self) -> WindowDataset:
        values = self.scaling_.transform("close", self.history.to_numpy())
        return build_windows(values, self.lag)

    def fit(self, frame: LabeledFrame) -> LstmSignalModel:
        closes = frame.column("close")
        low, high = float(closes.min()), float(closes.max())
        if not high > low:
            raise ConstantSeriesError("training closes are constant")
        self.scaling_ = ScalingMetadata({"close": (low, high)})
        dataset = self._windows().take(self._window_index(frame))
        self.result_ = train(dataset, self.config)
        return self

    def predict(self, frame: LabeledFrame) -> SignalSeries:
        inputs = self._windows().inputs[self._window_index(frame)]
        return predict_signals(
            self.result_.model,
            inputs,
            self.scaling_,
            frame.column("close"),
            frame.dates,
        )

    def to_dict(self) -> dict:
        return {
            "lag": self.lag,
            "scaling": scaling_bounds(self.scaling_),
            "losses": list(self.result_.losses) if self.result_ else [],
            "parameters": self.result_.model.to_dict() if self.result_ else {},
        }
