"""Weight-set similarity and the pairwise removal-cost matrix.

The cost of removing neuron ``j`` in favor of keeping neuron ``i`` is

    values[i, j] = mean_outgoing_square(j) * similarity(i, j)**2

where ``mean_outgoing_square(j)`` averages the squared outgoing weights of
``j`` over all next-layer neurons, and ``similarity`` measures how far
apart the two incoming weight-sets are. Low values mean the pair is safe
to merge. Note the asymmetry: ``j`` is the candidate for removal, ``i``
receives the surgery, and only ``j``'s outgoing weights enter the product.

Two similarity measures are provided:

* ``RAW_DIFFERENCE``: the plain Euclidean distance between the two
  weight-sets, bias included. This is the measure the removal-error bound
  is proved for; see :func:`verify_bound`.
* ``NORMALIZED_HEURISTIC``: distance of the unit-normalized non-bias
  weights divided by the magnitude of their sum, plus a matching relative
  bias term. Biases are trained without weight decay and tend to dwarf the
  weights, and two weight rows that differ only by a positive scale
  compute near-identical features; both effects make the raw distance a
  poor ranking. This measure is the default for pruning.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .network import (
    Activation,
    FcLayer,
    Network,
    WeightSet,
    forward,
    merge_neurons,
)

__all__ = [
    "SimilarityMode",
    "SimilarityConfig",
    "SaliencyMatrix",
    "ContractionReport",
    "BoundSample",
    "DIAGONAL_SENTINEL",
    "raw_difference",
    "heuristic_similarity",
    "similarity",
    "mean_outgoing_square",
    "build_saliency_matrix",
    "verify_contraction",
    "verify_bound",
]

# Largest finite double, not +inf, so minimum scans stay total-order safe.
DIAGONAL_SENTINEL = float(np.finfo(np.float64).max)


class SimilarityMode(Enum):
    RAW_DIFFERENCE = "raw"
    NORMALIZED_HEURISTIC = "heuristic"


@dataclass(frozen=True)
class SimilarityConfig:
    """How weight-set similarity is measured.

    ``denominator_guard`` floors the heuristic's denominators so opposite
    weight rows (or biases summing to zero) yield a large finite value
    instead of a division error.
    """

    mode: SimilarityMode = SimilarityMode.NORMALIZED_HEURISTIC
    denominator_guard: float = 1e-12

    def __post_init__(self):
        if not self.denominator_guard > 0:
            raise ValueError("denominator_guard must be positive")


def raw_difference(wi: WeightSet, wj: WeightSet) -> float:
    """Euclidean distance between two weight-sets, bias included."""
    if len(wi) != len(wj):
        raise ValueError("weight-sets must have equal length")
    d = wi.weights - wj.weights
    return float(np.sqrt(np.dot(d, d) + (wi.bias - wj.bias) ** 2))


def heuristic_similarity(wi: WeightSet, wj: WeightSet, cfg: SimilarityConfig) -> float:
    """Scale-insensitive similarity with sensible-sized weight and bias terms.

    The non-bias weights are normalized to unit length before being
    compared, so rows differing only by a positive scale contribute
    nothing to the first term; the denominators keep the weight and bias
    contributions on comparable footing.
    """
    if len(wi) != len(wj):
        raise ValueError("weight-sets must have equal length")
    guard = cfg.denominator_guard
    ni = float(np.linalg.norm(wi.weights))
    nj = float(np.linalg.norm(wj.weights))
    if ni == 0.0 and nj == 0.0 and wi.bias == 0.0 and wj.bias == 0.0:
        warnings.warn(
            "both weight-sets are all-zero; treating them as maximally similar",
            RuntimeWarning,
            stacklevel=2,
        )
        return 0.0
    unit_i = wi.weights / max(ni, guard)
    unit_j = wj.weights / max(nj, guard)
    weight_term = float(np.linalg.norm(unit_i - unit_j)) / max(
        float(np.linalg.norm(wi.weights + wj.weights)), guard
    )
    bias_term = abs(wi.bias - wj.bias) / max(abs(wi.bias + wj.bias), guard)
    return weight_term + bias_term


def similarity(wi: WeightSet, wj: WeightSet, cfg: SimilarityConfig) -> float:
    if cfg.mode is SimilarityMode.RAW_DIFFERENCE:
        return raw_difference(wi, wj)
    return heuristic_similarity(wi, wj, cfg)


def mean_outgoing_square(next_layer: FcLayer, j: int) -> float:
    """Mean over next-layer neurons of the squared outgoing weight of neuron ``j``."""
    if not 0 <= j < next_layer.n_in:
        raise ValueError(f"column {j} out of range for layer with {next_layer.n_in} inputs")
    col = next_layer.weights[:, j]
    return float(np.mean(col * col))


@dataclass(frozen=True)
class SaliencyMatrix:
    """Pairwise removal costs over a layer, in the layer's original numbering.

    ``live`` masks the surviving neurons; rows/columns of removed neurons
    and the diagonal hold :data:`DIAGONAL_SENTINEL` so they never win a
    minimum scan. ``sim_sq`` caches the squared similarities, which depend
    only on incoming weights and therefore stay valid across surgery;
    ``mean_sq_out`` holds the per-neuron outgoing factor, the only part an
    incremental update has to refresh.
    """

    values: np.ndarray
    live: np.ndarray
    layer_index: int
    sim_sq: np.ndarray
    mean_sq_out: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        live = np.array(self.live, dtype=bool)
        sim_sq = np.array(self.sim_sq, dtype=np.float64)
        msq = np.array(self.mean_sq_out, dtype=np.float64)
        n = values.shape[0]
        if values.shape != (n, n) or sim_sq.shape != (n, n):
            raise ValueError("values and sim_sq must be square matrices of equal size")
        if live.shape != (n,) or msq.shape != (n,):
            raise ValueError("live mask and outgoing factors must match the matrix size")
        for arr in (values, live, sim_sq, msq):
            arr.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "live", live)
        object.__setattr__(self, "sim_sq", sim_sq)
        object.__setattr__(self, "mean_sq_out", msq)

    @property
    def n_original(self) -> int:
        return self.values.shape[0]

    @property
    def n_live(self) -> int:
        return int(np.count_nonzero(self.live))

    def original_indices(self) -> np.ndarray:
        """Original indices of the surviving neurons, ascending."""
        return np.flatnonzero(self.live)

    def physical_index(self, original: int) -> int:
        """Position of a live neuron in the physically shrunken layer."""
        if not self.live[original]:
            raise ValueError(f"neuron {original} is no longer live")
        return int(np.count_nonzero(self.live[:original]))

    def argmin_live(self) -> tuple[int, int]:
        """Smallest live off-diagonal entry as (kept, removed) original indices.

        Ties are broken by the smallest removed index, then the smallest
        kept index, so repeated scans are fully deterministic.
        """
        mask = np.outer(self.live, self.live)
        np.fill_diagonal(mask, False)
        if not mask.any():
            raise ValueError("need at least two live neurons")
        masked = np.where(mask, self.values, DIAGONAL_SENTINEL)
        lowest = masked.min()
        rows, cols = np.nonzero(masked == lowest)
        j = int(cols.min())
        i = int(rows[cols == j].min())
        return i, j


def build_saliency_matrix(
    layer: FcLayer,
    next_layer: FcLayer,
    cfg: SimilarityConfig,
    layer_index: int = 0,
) -> SaliencyMatrix:
    """Compute removal costs for every ordered pair of neurons in ``layer``."""
    if layer.n_out < 2:
        raise ValueError("need at least two neurons to rank pairs")
    if next_layer.n_in != layer.n_out:
        raise ValueError("next layer does not consume this layer's outputs")
    n = layer.n_out
    sets = [layer.weight_set(k) for k in range(n)]
    sim = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            sim[i, j] = sim[j, i] = similarity(sets[i], sets[j], cfg)
    sim_sq = sim * sim
    msq = np.array([mean_outgoing_square(next_layer, j) for j in range(n)])
    values = sim_sq * msq[None, :]
    np.fill_diagonal(values, DIAGONAL_SENTINEL)
    return SaliencyMatrix(
        values=values,
        live=np.ones(n, dtype=bool),
        layer_index=layer_index,
        sim_sq=sim_sq,
        mean_sq_out=msq,
    )


@dataclass(frozen=True)
class ContractionReport:
    """Sampled check that an activation never expands squared differences."""

    activation: Activation
    n_samples: int
    violations: int
    max_squared_ratio: float


def verify_contraction(
    activation: Activation,
    n_samples: int,
    sample_range: float,
    seed: int = 0,
) -> ContractionReport:
    """Sample pairs (p, q) and count violations of (h(p)-h(q))^2 <= (p-q)^2.

    Holds for any monotonically increasing activation with derivative at
    most one, so the count must come back zero for ReLU and sigmoid.
    """
    if activation not in (Activation.RELU, Activation.SIGMOID):
        raise ValueError("contraction check applies to relu and sigmoid only")
    if n_samples < 1:
        raise ValueError("need at least one sample")
    rng = np.random.default_rng(seed)
    p = rng.uniform(-sample_range, sample_range, n_samples)
    q = rng.uniform(-sample_range, sample_range, n_samples)
    lhs = (activation.apply(p) - activation.apply(q)) ** 2
    rhs = (p - q) ** 2
    violations = int(np.count_nonzero(lhs > rhs))
    positive = rhs > 0
    ratio = float((lhs[positive] / rhs[positive]).max()) if positive.any() else 0.0
    return ContractionReport(
        activation=activation,
        n_samples=n_samples,
        violations=violations,
        max_squared_ratio=ratio,
    )


@dataclass(frozen=True)
class BoundSample:
    """One input's removal gap against its analytic ceiling.

    ``bound_value`` is ``mean_outgoing_square(j) * raw_difference(i, j)**2
    * (|x|^2 + 1)``; the +1 is the constant coordinate that absorbs the
    bias, matching the raw difference which includes the bias term.
    ``gap_sq`` averages the squared output change over all output neurons.
    """

    x: np.ndarray
    z_full: np.ndarray
    z_pruned: np.ndarray
    gap_sq: float
    bound_value: float

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=np.float64))
        object.__setattr__(self, "z_full", np.asarray(self.z_full, dtype=np.float64))
        object.__setattr__(self, "z_pruned", np.asarray(self.z_pruned, dtype=np.float64))

    @property
    def holds(self) -> bool:
        # The slack covers the zero-bound corner: merging exact duplicates
        # computes (a_i + a_j) h(..) in one step where the original summed two
        # products, so the gap can be a few ulps above an exactly-zero bound.
        return self.gap_sq <= self.bound_value + 1e-24


def verify_bound(
    net: Network,
    layer_index: int,
    i: int,
    j: int,
    xs,
    cfg: SimilarityConfig | None = None,
) -> list[BoundSample]:
    """Check the removal-error ceiling for merging neuron ``j`` into ``i``.

    For each input, compares the mean squared output gap between the
    network and its merged counterpart against the product of ``j``'s mean
    squared outgoing weight, the squared raw weight-set difference, and
    the squared absorbed input norm. The ceiling is only valid for the raw
    difference, and only where the merged layer feeds the output directly.
    """
    if cfg is None:
        cfg = SimilarityConfig(mode=SimilarityMode.RAW_DIFFERENCE)
    if cfg.mode is not SimilarityMode.RAW_DIFFERENCE:
        raise ValueError("the removal bound is only established for the raw difference")
    if layer_index != len(net.layers) - 2:
        raise ValueError("the bound applies to the layer feeding the output directly")
    layer = net.layers[layer_index]
    if layer.activation not in (Activation.RELU, Activation.SIGMOID):
        raise ValueError("the bound needs a relu or sigmoid layer")
    if i == j:
        raise ValueError("kept and removed neuron must differ")
    eps = raw_difference(layer.weight_set(i), layer.weight_set(j))
    a_sq = mean_outgoing_square(net.layers[layer_index + 1], j)
    pruned = merge_neurons(net, layer_index, i, j)
    samples = []
    for x in xs:
        x = np.asarray(x, dtype=np.float64)
        z_full = forward(net, x)
        z_pruned = forward(pruned, x)
        gap_sq = float(np.mean((z_full - z_pruned) ** 2))
        # The ceiling is stated in terms of the merged layer's own input,
        # which for deeper nets is the activation of the previous layer.
        layer_input = x
        for earlier in net.layers[:layer_index]:
            layer_input = earlier.activation.apply(earlier.weights @ layer_input + earlier.bias)
        bound = a_sq * eps * eps * (float(np.dot(layer_input, layer_input)) + 1.0)
        samples.append(
            BoundSample(x=x, z_full=z_full, z_pruned=z_pruned, gap_sq=gap_sq, bound_value=bound)
        )
    return samples
