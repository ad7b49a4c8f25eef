"""Mixing diagnostics: autocorrelations, mode occupancy and switching,
acceptance rates, and per-mode moment summaries."""

from dataclasses import dataclass

import numpy as np

from .sampler import MoveTally
from .targets import ModeDescriptor

__all__ = [
    "AcfResult",
    "ModeTrace",
    "ModeMoments",
    "autocorrelation",
    "assign_modes",
    "acceptance_report",
    "per_mode_moments",
]


@dataclass
class AcfResult:
    lags: np.ndarray
    acf: np.ndarray


@dataclass
class ModeTrace:
    """Per-sample nearest-mode assignments with switch and occupancy summaries."""

    assignments: np.ndarray
    switch_count: int
    occupancy: np.ndarray


@dataclass
class ModeMoments:
    count: int
    mean: np.ndarray | None
    cov: np.ndarray | None


def autocorrelation(series, max_lag: int) -> AcfResult:
    """Sample ACF with the biased (lag-0 sum) normalization used for plots.

    acf[l] = sum_t (x_t - xbar)(x_{t+l} - xbar) / sum_t (x_t - xbar)^2,
    which guarantees values in [-1, 1] and acf[0] = 1.
    """
    series = np.asarray(series, dtype=float)
    if series.ndim != 1:
        raise ValueError("series must be one-dimensional")
    if len(series) <= max_lag:
        raise ValueError("series must be longer than max_lag")
    centered = series - series.mean()
    denom = float(centered @ centered)
    if denom == 0.0:
        raise ValueError("series is constant; autocorrelation is undefined")
    acf = np.empty(max_lag + 1)
    acf[0] = 1.0
    for lag in range(1, max_lag + 1):
        acf[lag] = float(centered[:-lag] @ centered[lag:]) / denom
    return AcfResult(lags=np.arange(max_lag + 1), acf=acf)


def assign_modes(samples: np.ndarray, modes: list[ModeDescriptor]) -> ModeTrace:
    """Assign each sample to the Euclidean-nearest mode (ties to the lowest
    index) and count adjacent-sample switches."""
    if not modes:
        raise ValueError("at least one mode is required")
    samples = np.asarray(samples, dtype=float)
    locs = np.stack([m.location for m in modes])
    d2 = ((samples[:, None, :] - locs[None, :, :]) ** 2).sum(axis=2)
    assignments = np.argmin(d2, axis=1)
    switch_count = int(np.count_nonzero(np.diff(assignments)))
    occupancy = np.bincount(assignments, minlength=len(modes)) / len(samples)
    return ModeTrace(assignments=assignments, switch_count=switch_count, occupancy=occupancy)


def acceptance_report(tallies: dict[tuple[int, str], MoveTally]) -> dict[tuple[int, str], float]:
    """Acceptance rate per (chain, move type); cells without attempts are
    absent rather than reported as 0."""
    return {
        key: tally.accepted / tally.attempted
        for key, tally in sorted(tallies.items())
        if tally.attempted > 0
    }


def per_mode_moments(samples: np.ndarray, trace: ModeTrace) -> dict[int, ModeMoments]:
    """Sample mean and covariance of each mode's assigned samples; clusters
    with fewer than two samples are flagged with absent moments."""
    samples = np.asarray(samples, dtype=float)
    result: dict[int, ModeMoments] = {}
    for mode in range(len(trace.occupancy)):
        members = samples[trace.assignments == mode]
        if len(members) < 2:
            result[mode] = ModeMoments(count=len(members), mean=None, cov=None)
            continue
        result[mode] = ModeMoments(
            count=len(members),
            mean=members.mean(axis=0),
            cov=np.cov(members, rowvar=False),
        )
    return result
