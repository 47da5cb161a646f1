"""Plain SGD training of one-hidden-layer classifiers, and evaluation.

Training is deliberately simple so runs are bit-reproducible: no
momentum, sequential minibatches from a seeded shuffle, and every random
draw (initialization, then one permutation per epoch) comes from a
single generator in a documented order. Weight decay applies to weight
matrices only; biases are updated from their gradient alone.

The output layer is linear. Class predictions take the argmax of the
logits, with ties resolved toward the smallest class index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .network import Activation, FcLayer, Network, delete_neuron, forward_batch, merge_neurons
from .pruning import PrunePolicy, PruneStep, PruneTrace, prune_layer
from .saliency import SimilarityConfig

__all__ = [
    "TrainConfig",
    "TrainingDiverged",
    "train",
    "evaluate",
    "error_curve",
    "trace_error_curve",
]


class TrainingDiverged(RuntimeError):
    """Raised when the loss stops being finite; carries epoch context."""


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters for the fixture trainer.

    ``weight_decay`` is applied to the two weight matrices and never to
    the biases. ``epochs`` may be zero, in which case the seeded
    initialization is returned untouched.
    """

    hidden_units: int = 20
    activation: Activation = Activation.SIGMOID
    learning_rate: float = 0.5
    epochs: int = 60
    batch_size: int = 32
    seed: int = 0
    weight_decay: float = 1e-3

    def __post_init__(self):
        if self.hidden_units < 1:
            raise ValueError("need at least one hidden unit")
        if self.activation not in (Activation.SIGMOID, Activation.RELU):
            raise ValueError("hidden activation must be sigmoid or relu")
        if self.learning_rate <= 0:
            raise ValueError("learning rate must be positive")
        if self.epochs < 0:
            raise ValueError("epochs must be nonnegative")
        if self.batch_size < 1:
            raise ValueError("batch size must be positive")
        if self.weight_decay < 0:
            raise ValueError("weight decay must be nonnegative")


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def _log_loss(logits: np.ndarray, labels: np.ndarray) -> float:
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1))
    return float(np.mean(log_norm - shifted[np.arange(len(labels)), labels]))


def _init_params(rng, d: int, hidden: int, n_classes: int):
    # Draw order matters for reproducibility: hidden weights first, then
    # output weights, biases start at zero.
    w1 = rng.normal(0.0, 1.0 / np.sqrt(d), size=(hidden, d))
    w2 = rng.normal(0.0, 1.0 / np.sqrt(hidden), size=(n_classes, hidden))
    return w1, np.zeros(hidden), w2, np.zeros(n_classes)


def train(ds: Dataset, cfg: TrainConfig) -> Network:
    """Fit a ``d -> hidden -> C`` classifier with seeded minibatch SGD.

    One generator seeded by ``cfg.seed`` supplies, in order: the two
    weight initializations, then one train-split permutation per epoch.
    Minibatches are consecutive slices of that permutation. Raises
    :class:`TrainingDiverged` the first epoch the mean loss is not
    finite.
    """
    x_train, y_train = ds.split("train")
    if len(y_train) == 0:
        raise ValueError("train split is empty")
    n_classes = ds.n_classes
    if n_classes < 2:
        raise ValueError("need at least two classes")
    rng = np.random.default_rng(cfg.seed)
    w1, b1, w2, b2 = _init_params(rng, ds.n_features, cfg.hidden_units, n_classes)
    act = cfg.activation
    lr = cfg.learning_rate
    decay = cfg.weight_decay
    n = len(y_train)
    for epoch in range(cfg.epochs):
        perm = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, cfg.batch_size):
            batch = perm[start : start + cfg.batch_size]
            xb = x_train[batch]
            yb = y_train[batch]
            pre = xb @ w1.T + b1
            hid = act.apply(pre)
            logits = hid @ w2.T + b2
            epoch_loss += _log_loss(logits, yb) * len(batch)
            grad_logits = _softmax(logits)
            grad_logits[np.arange(len(batch)), yb] -= 1.0
            grad_logits /= len(batch)
            grad_w2 = grad_logits.T @ hid
            grad_b2 = grad_logits.sum(axis=0)
            grad_hid = grad_logits @ w2
            if act is Activation.SIGMOID:
                grad_pre = grad_hid * hid * (1.0 - hid)
            else:
                grad_pre = grad_hid * (pre > 0.0)
            grad_w1 = grad_pre.T @ xb
            grad_b1 = grad_pre.sum(axis=0)
            w1 -= lr * (grad_w1 + decay * w1)
            b1 -= lr * grad_b1
            w2 -= lr * (grad_w2 + decay * w2)
            b2 -= lr * grad_b2
        if not np.isfinite(epoch_loss):
            raise TrainingDiverged(
                f"mean loss became non-finite in epoch {epoch + 1} of {cfg.epochs}"
            )
    return Network(
        layers=(
            FcLayer(weights=w1, bias=b1, activation=act),
            FcLayer(weights=w2, bias=b2, activation=Activation.IDENTITY),
        ),
        input_dim=ds.n_features,
    )


def evaluate(net: Network, ds: Dataset, split: str = "test") -> tuple[float, float]:
    """Accuracy and error of argmax predictions on one split, in percent."""
    x, y = ds.split(split)
    if len(y) == 0:
        raise ValueError(f"{split} split is empty")
    logits = forward_batch(net, x)
    predictions = np.argmax(logits, axis=1)  # first maximum, so ties pick the smallest class
    accuracy = 100.0 * float(np.mean(predictions == y))
    return accuracy, 100.0 - accuracy


def trace_error_curve(
    net: Network,
    trace: PruneTrace,
    ds: Dataset,
    split: str = "test",
    eval_every: int = 1,
) -> list[tuple[int, float]]:
    """Error after each recorded removal, replayed incrementally.

    Returns (step, error) pairs starting at step 0 (the unpruned
    baseline). With ``eval_every`` > 1, only every k-th step is
    measured; the final step is always included.
    """
    if eval_every < 1:
        raise ValueError("eval_every must be at least 1")
    if net.layers[trace.layer_index].n_out != trace.n_original:
        raise ValueError("trace was recorded for a layer of a different width")
    total = len(trace.steps)
    curve = [(0, evaluate(net, ds, split)[1])]
    wanted = set(range(eval_every, total + 1, eval_every)) | ({total} if total else set())
    live = np.ones(trace.n_original, dtype=bool)
    current = net
    for done, step in enumerate(trace.steps, start=1):
        current = _apply_step(current, trace.layer_index, step, live)
        if done in wanted:
            curve.append((done, evaluate(current, ds, split)[1]))
    return curve


def _apply_step(net: Network, layer_index: int, step: PruneStep, live: np.ndarray) -> Network:
    if not live[step.removed]:
        raise ValueError(f"trace removes neuron {step.removed} twice")
    removed_physical = int(np.count_nonzero(live[: step.removed]))
    if step.kept is None:
        net = delete_neuron(net, layer_index, removed_physical)
    else:
        if not live[step.kept]:
            raise ValueError(f"trace merges into already-removed neuron {step.kept}")
        kept_physical = int(np.count_nonzero(live[: step.kept]))
        net = merge_neurons(net, layer_index, kept_physical, removed_physical)
    live[step.removed] = False
    return net


def error_curve(
    net: Network,
    layer_index: int,
    ds: Dataset,
    policy: PrunePolicy,
    cfg: SimilarityConfig | None = None,
    split: str = "test",
    eval_every: int = 1,
) -> list[tuple[int, float]]:
    """Prune a layer down to one neuron, measuring error along the way.

    Runs the policy for its full course, then replays the recorded
    removals one at a time, evaluating on the requested split. Returns
    (step, error) pairs beginning with the unpruned baseline at step 0.
    """
    count = net.layers[layer_index].n_out - 1
    _, trace = prune_layer(net, layer_index, count, policy, cfg)
    return trace_error_curve(net, trace, ds, split, eval_every)
