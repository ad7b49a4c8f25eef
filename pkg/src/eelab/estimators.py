"""Expectation estimators over cold-chain output.

Besides the plain ergodic average, this module implements a
partition-weighted estimator over the energy rings,

    (1/n) * sum_i w_{j(i)} g(X_i),   j(i) = ring of sample i,

with per-ring weights estimated from the hotter chains. The weight of ring j
is the ratio of an importance estimate of pi's ring mass to the cold chain's
empirical ring frequency: each pooled sample x from chain k carries
unnormalized weight exp(max(h(x), H_k)/T_k - h(x)), the density ratio of pi
to chain k's flattened working density, and the estimate is self-normalized
so no normalizing constants are needed. Weights are rescaled at the end so
that sum_j w_j * F0(D_j) = 1.
"""

from dataclasses import dataclass

import numpy as np

from .ladders import Ladders
from .sampler import RingStore

__all__ = [
    "PartitionWeights",
    "EstimateResult",
    "ergodic_average",
    "partition_weighted_estimate",
    "estimate_partition_weights",
]


@dataclass
class PartitionWeights:
    """Nonnegative weight per ring; rings the cold chain never visited are
    listed in zero_frequency_rings and carry weight 0."""

    w: np.ndarray
    zero_frequency_rings: tuple[int, ...] = ()

    def __post_init__(self):
        self.w = np.asarray(self.w, dtype=float)
        if np.any(~np.isfinite(self.w)) or np.any(self.w < 0):
            raise ValueError("weights must be finite and nonnegative")


@dataclass
class EstimateResult:
    value: np.ndarray
    n_used: int
    ring_counts: np.ndarray | None = None


def _eval_g(samples: np.ndarray, g) -> np.ndarray:
    rows = [np.atleast_1d(np.asarray(g(x), dtype=float)) for x in samples]
    return np.stack(rows)


def ergodic_average(samples: np.ndarray, g) -> EstimateResult:
    """Arithmetic mean of g over the samples."""
    samples = np.asarray(samples, dtype=float)
    if len(samples) == 0:
        raise ValueError("samples must be nonempty")
    values = _eval_g(samples, g)
    return EstimateResult(value=values.mean(axis=0), n_used=len(samples))


def partition_weighted_estimate(
    samples: np.ndarray,
    rings: np.ndarray,
    weights: PartitionWeights,
    g,
) -> EstimateResult:
    """(1/n) * sum_i w_{ring(i)} g(X_i); with unit weights this reproduces
    ergodic_average exactly, summation order included."""
    samples = np.asarray(samples, dtype=float)
    rings = np.asarray(rings, dtype=np.int64)
    if len(samples) == 0:
        raise ValueError("samples must be nonempty")
    if len(rings) != len(samples):
        raise ValueError("each sample needs a ring index")
    n_rings = len(weights.w)
    if rings.min() < 0 or rings.max() >= n_rings:
        raise ValueError(f"ring indices must lie in [0, {n_rings - 1}]")
    values = _eval_g(samples, g)
    weighted = values * weights.w[rings][:, None]
    counts = np.bincount(rings, minlength=n_rings)
    return EstimateResult(value=weighted.mean(axis=0), n_used=len(samples), ring_counts=counts)


def estimate_partition_weights(
    stores: RingStore,
    chain0_ring_counts: np.ndarray,
    ladders: Ladders,
) -> PartitionWeights:
    """Ring weights w_j = P_hat(D_j) / F0_hat(D_j) from the pooled hotter
    chains (orders 1..K), rescaled so sum_j w_j F0_hat(D_j) = 1.

    P_hat is the self-normalized importance estimate described in the module
    docstring, computed from the archived energies. Rings with zero cold
    chain frequency get weight 0 and are flagged.
    """
    chain0_ring_counts = np.asarray(chain0_ring_counts, dtype=float)
    n_rings = stores.n_rings
    if stores.n_chains != n_rings or n_rings != len(ladders.energy.levels):
        raise ValueError("stores and ladders disagree on the number of chains/rings")
    if chain0_ring_counts.shape != (n_rings,):
        raise ValueError(f"chain0_ring_counts must have one entry per ring ({n_rings})")
    n0 = chain0_ring_counts.sum()
    if n0 <= 0:
        raise ValueError("the cold chain contributed no samples")

    levels = ladders.energy.levels
    temps = ladders.temperature.temps
    log_u_per_ring: list[list[np.ndarray]] = [[] for _ in range(n_rings)]
    pooled = 0
    for k in range(1, stores.n_chains):
        for j in range(n_rings):
            e = stores.energies(k, j)
            if len(e) == 0:
                continue
            log_u_per_ring[j].append(np.maximum(e, levels[k]) / temps[k] - e)
            pooled += len(e)
    if pooled == 0:
        raise ValueError("all hotter-chain ring archives are empty")

    peak = max(chunk.max() for chunks in log_u_per_ring for chunk in chunks)
    mass = np.zeros(n_rings)
    for j, chunks in enumerate(log_u_per_ring):
        for chunk in chunks:
            mass[j] += np.exp(chunk - peak).sum()
    ring_prob = mass / mass.sum()

    freq0 = chain0_ring_counts / n0
    visited = freq0 > 0
    w = np.zeros(n_rings)
    w[visited] = ring_prob[visited] / freq0[visited]
    scale = float((w * freq0).sum())
    if scale <= 0:
        raise ValueError("pooled archives carry no mass on the rings the cold chain visited")
    w /= scale
    flagged = tuple(int(j) for j in np.nonzero(~visited)[0])
    return PartitionWeights(w=w, zero_frequency_rings=flagged)
