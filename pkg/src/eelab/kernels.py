"""Move kernels: local Metropolis-Hastings steps and equi-energy jumps.

Both kernels are pure functions of (state, rng) plus read-only context, and
both return a fresh ChainState together with a MoveRecord for acceptance
bookkeeping. The MH step supports two proposals:

* random walk, spherical Gaussian with per-coordinate std tau * sqrt(T_k),
  which is symmetric; and
* mode jump, a draw from the Gaussian attached to the mode nearest the
  current point. The proposal is state dependent, so the Hastings correction
  evaluates the reverse density under the mode nearest the *proposed* point;
  dropping that correction breaks detailed balance.

The equi-energy jump proposes a point drawn uniformly from the next-hotter
chain's archive for the current ring, so an accepted jump never changes the
ring index. An empty archive counts as a rejected jump rather than being
silently replaced by an MH move, which keeps the jump-probability accounting
honest in the diagnostics.
"""

import math
from dataclasses import dataclass

import numpy as np

from .ladders import Ladders, ring_index, tempered_log_density
from .targets import ModeDescriptor, TargetDistribution

__all__ = [
    "MOVE_MH",
    "MOVE_EE",
    "ChainState",
    "MoveRecord",
    "RandomWalkProposal",
    "ModeJumpProposal",
    "propose_random_walk",
    "propose_mode_jump",
    "log_accept_mh",
    "log_accept_ee",
    "mh_step",
    "ee_jump_step",
]

MOVE_MH = "mh"
MOVE_EE = "ee_jump"


def _accept(log_alpha: float, rng) -> bool:
    """Metropolis coin flip; always consumes exactly one uniform."""
    u = rng.random()
    if log_alpha >= 0.0:
        return True
    if log_alpha == -math.inf:
        return False
    if u <= 0.0:
        return True
    return math.log(u) < log_alpha


@dataclass
class ChainState:
    """Current point of one chain: order k, location x, cached energy h."""

    order: int
    x: np.ndarray
    h: float
    step_count: int = 0


@dataclass
class MoveRecord:
    """Outcome of one move attempt; log_accept_prob is min(0, log ratio)."""

    move_type: str
    accepted: bool
    log_accept_prob: float


@dataclass
class RandomWalkProposal:
    """Spherical Gaussian random walk with step scale tau (> 0)."""

    tau: float

    def __post_init__(self):
        if self.tau <= 0:
            raise ValueError("step scale tau must be positive")


class ModeJumpProposal:
    """Independence-style proposal from the Gaussian of the nearest mode.

    Nearest is Euclidean distance to the mode locations, ties resolved to the
    lowest index.
    """

    def __init__(self, modes: list[ModeDescriptor]):
        if not modes:
            raise ValueError("mode jump requires at least one declared mode")
        self.modes = list(modes)
        self._locs = np.stack([m.location for m in modes])
        self._chols = [np.linalg.cholesky(m.local_covariance) for m in modes]
        self._inv_covs = [np.linalg.inv(m.local_covariance) for m in modes]
        dim = self._locs.shape[1]
        self._log_norms = [
            -0.5 * (dim * math.log(2.0 * math.pi) + 2.0 * np.log(np.diag(L)).sum())
            for L in self._chols
        ]

    def nearest(self, x: np.ndarray) -> int:
        d = self._locs - x
        return int(np.argmin(np.einsum("md,md->m", d, d)))

    def logpdf(self, mode_idx: int, point: np.ndarray) -> float:
        d = point - self._locs[mode_idx]
        return float(self._log_norms[mode_idx] - 0.5 * (d @ self._inv_covs[mode_idx] @ d))

    def draw(self, x: np.ndarray, rng) -> tuple[np.ndarray, float, float]:
        i = self.nearest(x)
        y = self._locs[i] + self._chols[i] @ rng.standard_normal(len(x))
        log_q_forward = self.logpdf(i, y)
        log_q_backward = self.logpdf(self.nearest(y), x)
        return y, log_q_forward, log_q_backward


def propose_random_walk(x: np.ndarray, tau: float, temperature: float, rng) -> np.ndarray:
    """x plus tau * sqrt(T) * z with z standard normal (symmetric proposal)."""
    if tau <= 0:
        raise ValueError("step scale tau must be positive")
    return x + (tau * math.sqrt(temperature)) * rng.standard_normal(len(x))


def propose_mode_jump(
    x: np.ndarray, modes: list[ModeDescriptor], rng
) -> tuple[np.ndarray, float, float]:
    """Draw from the nearest mode's Gaussian; returns (y, log q(y|x), log q(x|y))."""
    return ModeJumpProposal(modes).draw(np.asarray(x, dtype=float), rng)


def log_accept_mh(
    h_x: float,
    h_y: float,
    k: int,
    ladders: Ladders,
    log_q_forward: float = 0.0,
    log_q_backward: float = 0.0,
) -> float:
    """Log MH acceptance ratio for chain k, capped at 0."""
    if not math.isfinite(h_y):
        return -math.inf
    ratio = (
        tempered_log_density(h_y, k, ladders)
        - tempered_log_density(h_x, k, ladders)
        + log_q_backward
        - log_q_forward
    )
    return min(0.0, ratio)


def log_accept_ee(h_x: float, h_y: float, k: int, ladders: Ladders) -> float:
    """Log acceptance ratio for swapping chain k onto a ring draw from chain
    k+1: the detailed-balance ratio between the two working densities.

    Grouped per point so each term is one point's log density ratio between
    the two chains; coinciding adjacent ladders then cancel exactly.
    """
    ratio = (
        tempered_log_density(h_y, k, ladders) - tempered_log_density(h_y, k + 1, ladders)
    ) + (
        tempered_log_density(h_x, k + 1, ladders) - tempered_log_density(h_x, k, ladders)
    )
    return min(0.0, ratio)


def mh_step(
    state: ChainState,
    proposal,
    target: TargetDistribution,
    ladders: Ladders,
    rng,
) -> tuple[ChainState, MoveRecord]:
    """One Metropolis-Hastings move of chain `state.order`.

    Accepts with probability exp(log_accept_mh(...)); a proposal with
    non-finite coordinates or +inf energy is rejected outright. The returned
    state carries the freshly computed energy of the accepted point, or the
    unchanged point on rejection.
    """
    k = state.order
    if isinstance(proposal, ModeJumpProposal):
        y, log_q_f, log_q_b = proposal.draw(state.x, rng)
    else:
        temp = ladders.temperature._temp_list[k]
        y = propose_random_walk(state.x, proposal.tau, temp, rng)
        log_q_f = log_q_b = 0.0

    if not np.all(np.isfinite(y)):
        record = MoveRecord(MOVE_MH, False, -math.inf)
        return ChainState(k, state.x, state.h, state.step_count + 1), record

    h_y = target.energy_fn(y)
    log_alpha = log_accept_mh(state.h, h_y, k, ladders, log_q_f, log_q_b)
    accepted = _accept(log_alpha, rng)
    record = MoveRecord(MOVE_MH, accepted, log_alpha)
    if accepted:
        return ChainState(k, np.asarray(y, dtype=float), h_y, state.step_count + 1), record
    return ChainState(k, state.x, state.h, state.step_count + 1), record


def ee_jump_step(
    state: ChainState,
    rings_above,
    ladders: Ladders,
    rng,
) -> tuple[ChainState, MoveRecord]:
    """One equi-energy jump of chain k using chain k+1's ring archive.

    `rings_above` is a read view of the next-hotter chain's archive exposing
    count(ring) and draw(ring, rng) -> (point, energy); it must be a stable
    snapshot for the duration of the draw. If the matching ring is empty the
    move is recorded as a rejected jump and the state does not change.
    """
    k = state.order
    j = ring_index(state.h, ladders.energy)
    if rings_above.count(j) == 0:
        record = MoveRecord(MOVE_EE, False, -math.inf)
        return ChainState(k, state.x, state.h, state.step_count + 1), record

    y, h_y = rings_above.draw(j, rng)
    log_alpha = log_accept_ee(state.h, h_y, k, ladders)
    accepted = _accept(log_alpha, rng)
    record = MoveRecord(MOVE_EE, accepted, log_alpha)
    if accepted:
        # the archive only holds ring-j points, so the ring is preserved
        assert ring_index(h_y, ladders.energy) == j
        return ChainState(k, y, h_y, state.step_count + 1), record
    return ChainState(k, state.x, state.h, state.step_count + 1), record
