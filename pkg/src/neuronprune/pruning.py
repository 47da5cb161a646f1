"""Iterative neuron removal: pick the cheapest pair, merge, repeat.

The main loop removes one neuron per step: scan the removal-cost matrix
for its smallest live off-diagonal entry (i, j), fold j's outgoing
coefficients into i's, delete j, then refresh only what the merge
invalidated. Incoming weights never change, so cached similarities stay
valid; only the outgoing factor of the surviving neuron i must be
recomputed, which makes each step linear in the layer width after the
argmin scan.

Baseline policies for comparison runs:

* ``SALIENCY_NO_SURGERY`` replays the exact removal sequence the surgery
  policy would choose, but skips the coefficient fold, so any error gap
  between the two is attributable to the surgery update alone.
* ``NAIVE_MAGNITUDE`` removes the neuron with the smallest product of
  incoming-weight norm and outgoing-column norm, no surgery.
* ``RANDOM`` removes uniformly at random under an explicit seed.

All traces record neuron indices in the layer's original numbering, so a
trace stays meaningful after the layer has physically shrunk.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .network import Network, delete_neuron, merge_neurons
from .saliency import (
    DIAGONAL_SENTINEL,
    SaliencyMatrix,
    SimilarityConfig,
    build_saliency_matrix,
    mean_outgoing_square,
)

__all__ = [
    "PolicyKind",
    "PrunePolicy",
    "PruneStep",
    "PruneTrace",
    "prune_one",
    "prune_layer",
    "prune_network",
    "replay_trace",
    "compression_percent",
    "neuron_removal_params",
]


class PolicyKind(Enum):
    SALIENCY_SURGERY = "saliency-surgery"
    SALIENCY_NO_SURGERY = "saliency-no-surgery"
    NAIVE_MAGNITUDE = "naive-magnitude"
    RANDOM = "random"


@dataclass(frozen=True)
class PrunePolicy:
    """Which removal rule to run; a seed is required exactly for RANDOM."""

    kind: PolicyKind
    seed: int | None = None

    def __post_init__(self):
        if self.kind is PolicyKind.RANDOM:
            if self.seed is None:
                raise ValueError("the random policy needs an explicit seed")
        elif self.seed is not None:
            raise ValueError(f"policy {self.kind.value} does not take a seed")


@dataclass(frozen=True)
class PruneStep:
    """One removal, in the layer's original numbering.

    ``kept`` is the neuron that received the removed neuron's outgoing
    coefficients; it is ``None`` whenever no surgery was performed, so a
    trace can be replayed mechanically (merge when present, plain delete
    otherwise). ``saliency`` holds the policy's own score: the matrix
    entry for the saliency policies, the magnitude product for
    NAIVE_MAGNITUDE, and 0.0 for RANDOM.
    """

    step_number: int
    removed: int
    saliency: float
    kept: int | None = None

    def __post_init__(self):
        if self.step_number < 1:
            raise ValueError("step numbers start at 1")
        if self.removed < 0:
            raise ValueError("removed index must be nonnegative")
        if self.kept is not None and self.kept == self.removed:
            raise ValueError("kept and removed neuron must differ")
        if not (math.isfinite(self.saliency) and self.saliency >= 0.0):
            raise ValueError("saliency must be finite and nonnegative")


@dataclass(frozen=True)
class PruneTrace:
    """Ordered removal record for one layer.

    ``n_original`` is the layer width before the first removal; with it,
    a consumer can tell whether the trace covers the full spectrum down
    to a single surviving neuron. ``test_errors``, when present, holds
    one measured error per step.
    """

    layer_index: int
    n_original: int
    steps: tuple[PruneStep, ...]
    test_errors: tuple[float, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        if self.n_original < 2:
            raise ValueError("a prunable layer has at least two neurons")
        if len(self.steps) > self.n_original - 1:
            raise ValueError("cannot remove more neurons than the layer can spare")
        removed = [s.removed for s in self.steps]
        if len(set(removed)) != len(removed):
            raise ValueError("removed indices must be distinct")
        if any(r >= self.n_original for r in removed):
            raise ValueError("removed index outside the original layer")
        numbers = [s.step_number for s in self.steps]
        if any(b <= a for a, b in zip(numbers, numbers[1:])):
            raise ValueError("step numbers must be strictly increasing")
        if self.test_errors is not None:
            object.__setattr__(self, "test_errors", tuple(float(e) for e in self.test_errors))
            if len(self.test_errors) != len(self.steps):
                raise ValueError("need exactly one test error per step")

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def is_full(self) -> bool:
        """True when the trace pruned all the way down to one neuron."""
        return len(self.steps) == self.n_original - 1

    def saliencies(self) -> np.ndarray:
        return np.array([s.saliency for s in self.steps], dtype=np.float64)

    def with_test_errors(self, errors) -> "PruneTrace":
        return PruneTrace(
            layer_index=self.layer_index,
            n_original=self.n_original,
            steps=self.steps,
            test_errors=tuple(float(e) for e in errors),
        )


def prune_one(
    net: Network, layer_index: int, matrix: SaliencyMatrix
) -> tuple[Network, SaliencyMatrix, PruneStep]:
    """Remove the cheapest neuron with surgery and patch the cost matrix.

    Picks the smallest live off-diagonal entry (kept, removed), folds the
    removed neuron's outgoing column into the kept one, deletes it, then
    updates the matrix in place of a full rebuild: the removed row and
    column are retired and only the kept neuron's column is recomputed,
    since its outgoing factor is the only ingredient the merge changed.
    """
    if matrix.layer_index != layer_index:
        raise ValueError("matrix was built for a different layer")
    if matrix.n_live < 2:
        raise ValueError("cannot prune a single-neuron layer")
    if matrix.n_live != net.layers[layer_index].n_out:
        raise ValueError("matrix live count does not match the layer width")
    i, j = matrix.argmin_live()
    value = float(matrix.values[i, j])
    step = PruneStep(
        step_number=matrix.n_original - matrix.n_live + 1,
        removed=j,
        saliency=value,
        kept=i,
    )
    new_net = merge_neurons(
        net, layer_index, matrix.physical_index(i), matrix.physical_index(j)
    )
    live = matrix.live.copy()
    live[j] = False
    values = matrix.values.copy()
    values[j, :] = DIAGONAL_SENTINEL
    values[:, j] = DIAGONAL_SENTINEL
    msq = matrix.mean_sq_out.copy()
    kept_physical = int(np.count_nonzero(live[:i]))
    msq[i] = mean_outgoing_square(new_net.layers[layer_index + 1], kept_physical)
    column = matrix.sim_sq[:, i] * msq[i]
    column[~live] = DIAGONAL_SENTINEL
    column[i] = DIAGONAL_SENTINEL
    values[:, i] = column
    new_matrix = SaliencyMatrix(
        values=values,
        live=live,
        layer_index=layer_index,
        sim_sq=matrix.sim_sq,
        mean_sq_out=msq,
    )
    return new_net, new_matrix, step


def _run_saliency(
    net: Network, layer_index: int, count: int, cfg: SimilarityConfig, surgery: bool
) -> tuple[Network, list[PruneStep]]:
    # The no-surgery ablation replays the surgery policy's choices on a
    # shadow copy and applies only the deletions to the returned net.
    shadow = net
    matrix = build_saliency_matrix(
        net.layers[layer_index], net.layers[layer_index + 1], cfg, layer_index
    )
    steps = []
    for _ in range(count):
        before = matrix
        shadow, matrix, step = prune_one(shadow, layer_index, before)
        if surgery:
            steps.append(step)
        else:
            steps.append(replace(step, kept=None))
            net = delete_neuron(net, layer_index, before.physical_index(step.removed))
    return (shadow if surgery else net), steps


def _run_magnitude(
    net: Network, layer_index: int, count: int
) -> tuple[Network, list[PruneStep]]:
    alive = list(range(net.layers[layer_index].n_out))
    steps = []
    for step_number in range(1, count + 1):
        layer = net.layers[layer_index]
        nxt = net.layers[layer_index + 1]
        scores = np.linalg.norm(layer.weights, axis=1) * np.linalg.norm(nxt.weights, axis=0)
        k = int(np.argmin(scores))  # first minimum, so ties go to the smallest index
        steps.append(
            PruneStep(step_number=step_number, removed=alive[k], saliency=float(scores[k]))
        )
        net = delete_neuron(net, layer_index, k)
        alive.pop(k)
    return net, steps


def _run_random(
    net: Network, layer_index: int, count: int, seed: int
) -> tuple[Network, list[PruneStep]]:
    rng = np.random.default_rng(seed)
    alive = list(range(net.layers[layer_index].n_out))
    steps = []
    for step_number in range(1, count + 1):
        k = int(rng.integers(len(alive)))
        steps.append(PruneStep(step_number=step_number, removed=alive[k], saliency=0.0))
        net = delete_neuron(net, layer_index, k)
        alive.pop(k)
    return net, steps


def prune_layer(
    net: Network,
    layer_index: int,
    count: int,
    policy: PrunePolicy,
    cfg: SimilarityConfig | None = None,
) -> tuple[Network, PruneTrace]:
    """Remove ``count`` neurons from one layer under the given policy."""
    if cfg is None:
        cfg = SimilarityConfig()
    if not 0 <= layer_index < len(net.layers) - 1:
        raise ValueError(
            f"layer_index {layer_index} does not name a prunable layer; the "
            f"output layer (index {len(net.layers) - 1}) cannot be pruned"
        )
    n_out = net.layers[layer_index].n_out
    if not 1 <= count <= n_out - 1:
        raise ValueError(
            f"count must be in [1, {n_out - 1}] for a {n_out}-neuron layer, got {count}"
        )
    if policy.kind is PolicyKind.SALIENCY_SURGERY:
        net, steps = _run_saliency(net, layer_index, count, cfg, surgery=True)
    elif policy.kind is PolicyKind.SALIENCY_NO_SURGERY:
        net, steps = _run_saliency(net, layer_index, count, cfg, surgery=False)
    elif policy.kind is PolicyKind.NAIVE_MAGNITUDE:
        net, steps = _run_magnitude(net, layer_index, count)
    else:
        net, steps = _run_random(net, layer_index, count, policy.seed)
    trace = PruneTrace(layer_index=layer_index, n_original=n_out, steps=tuple(steps))
    return net, trace


def prune_network(
    net: Network,
    plan,
    policy: PrunePolicy,
    cfg: SimilarityConfig | None = None,
) -> tuple[Network, tuple[PruneTrace, ...]]:
    """Prune several layers front to back.

    The plan is a sequence of (layer_index, count) pairs sorted strictly
    ascending by layer index. Order matters: removing neurons from layer
    k rewrites the incoming weight-sets of layer k+1, so each layer's
    cost matrix is built only when its turn comes.
    """
    plan = [(int(layer_index), int(count)) for layer_index, count in plan]
    indices = [layer_index for layer_index, _ in plan]
    if any(b <= a for a, b in zip(indices, indices[1:])):
        raise ValueError("plan must list layer indices in strictly ascending order")
    traces = []
    for layer_index, count in plan:
        net, trace = prune_layer(net, layer_index, count, policy, cfg)
        traces.append(trace)
    return net, tuple(traces)


def replay_trace(net: Network, trace: PruneTrace, count: int | None = None) -> Network:
    """Re-apply the first ``count`` removals of a recorded trace.

    Steps with a ``kept`` partner are merged, the rest plainly deleted,
    so a replayed prefix reproduces the pruned network exactly without
    rebuilding any cost matrix. Original indices are mapped to physical
    positions by tracking which neurons are still alive.
    """
    if count is None:
        count = len(trace.steps)
    if not 0 <= count <= len(trace.steps):
        raise ValueError(f"count must be in [0, {len(trace.steps)}]")
    if net.layers[trace.layer_index].n_out != trace.n_original:
        raise ValueError("trace was recorded for a layer of a different width")
    live = np.ones(trace.n_original, dtype=bool)
    for step in trace.steps[:count]:
        if not live[step.removed]:
            raise ValueError(f"trace removes neuron {step.removed} twice")
        removed_physical = int(np.count_nonzero(live[: step.removed]))
        if step.kept is None:
            net = delete_neuron(net, trace.layer_index, removed_physical)
        else:
            if not live[step.kept]:
                raise ValueError(f"trace merges into already-removed neuron {step.kept}")
            kept_physical = int(np.count_nonzero(live[: step.kept]))
            net = merge_neurons(net, trace.layer_index, kept_physical, removed_physical)
        live[step.removed] = False
    return net


def compression_percent(removed_params: float, total_params: float) -> float:
    """Share of parameters removed, in percent."""
    if total_params <= 0:
        raise ValueError("total parameter count must be positive")
    if not 0 <= removed_params <= total_params:
        raise ValueError("removed parameters must lie in [0, total]")
    return 100.0 * removed_params / total_params


def neuron_removal_params(count: int, fan_in: int, fan_out: int) -> int:
    """Parameters freed by deleting ``count`` neurons of a dense layer.

    Each neuron owns ``fan_in`` incoming weights, one bias, and
    ``fan_out`` outgoing weights in the next layer's matrix.
    """
    if count < 0 or fan_in < 0 or fan_out < 0:
        raise ValueError("counts must be nonnegative")
    return count * (fan_in + 1 + fan_out)
