"""Shared fixtures for the test suite.

The trained classification fixtures cost hundreds of SGD epochs each, so
they are built once per session and shared by every module that needs a
realistic pruning curve.
"""

import dataclasses

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

import neuronprune as npr

settings.register_profile(
    "suite", deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("suite")

HIDDEN = 20
N_REMOVE = HIDDEN - 1

# Two-class fixture: cheap enough for module-level behavioral checks.
MODULE_SEEDS = (0, 1, 2, 3, 4)
MODULE_DATA = dict(n_classes=2, separation=4.0, label_noise=0.02)
MODULE_TRAIN = dict(learning_rate=0.5, epochs=300, weight_decay=5e-3)

# Four-class fixture: harder task, used by the acceptance gate. The random
# baseline is averaged over three draws per seed to damp draw-to-draw noise.
ACCEPT_SEEDS = tuple(range(10))
ACCEPT_DATA = dict(n_classes=4, separation=4.0, label_noise=0.02)
ACCEPT_TRAIN = dict(learning_rate=0.5, epochs=400, weight_decay=5e-3)


@dataclasses.dataclass(frozen=True)
class PolicyRun:
    """One seed's trained net plus traces and error curves for every policy."""

    seed: int
    dataset: npr.Dataset
    network: npr.Network
    traces: dict
    curves: dict
    baseline_error: float


def _run_seed(seed, data_kw, train_kw, random_draws):
    ds = npr.make_blobs(seed=seed, **data_kw)
    net = npr.train(ds, npr.TrainConfig(seed=seed, **train_kw))
    traces = {}
    curves = {}
    deterministic = (
        npr.PolicyKind.SALIENCY_SURGERY,
        npr.PolicyKind.SALIENCY_NO_SURGERY,
        npr.PolicyKind.NAIVE_MAGNITUDE,
    )
    for kind in deterministic:
        _, trace = npr.prune_layer(net, 0, N_REMOVE, npr.PrunePolicy(kind))
        traces[kind] = trace
        curves[kind] = dict(npr.trace_error_curve(net, trace, ds))
    draws = []
    for offset in range(random_draws):
        _, trace = npr.prune_layer(
            net,
            0,
            N_REMOVE,
            npr.PrunePolicy(npr.PolicyKind.RANDOM, seed=seed + 100 * offset),
        )
        draws.append(dict(npr.trace_error_curve(net, trace, ds)))
    curves[npr.PolicyKind.RANDOM] = {
        step: float(np.mean([d[step] for d in draws])) for step in draws[0]
    }
    baseline = curves[npr.PolicyKind.SALIENCY_SURGERY][0]
    return PolicyRun(seed, ds, net, traces, curves, baseline)


def mean_curve(runs, kind):
    """Elementwise mean of one policy's error curve across seeds."""
    steps = sorted(runs[0].curves[kind])
    return {s: float(np.mean([r.curves[kind][s] for r in runs])) for s in steps}


@pytest.fixture(scope="session")
def module_runs():
    return tuple(_run_seed(s, MODULE_DATA, MODULE_TRAIN, 1) for s in MODULE_SEEDS)


@pytest.fixture(scope="session")
def acceptance_runs():
    return tuple(_run_seed(s, ACCEPT_DATA, ACCEPT_TRAIN, 3) for s in ACCEPT_SEEDS)
