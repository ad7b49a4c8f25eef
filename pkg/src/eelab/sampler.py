"""Multi-chain equi-energy sampler with staged startup.

The run uses K+1 chains ordered from cold (0, targeting pi itself) to hot
(K). Chains activate hottest first: chain K runs alone for B+N steps (B
burn-in, then N steps that seed its ring archive), chain K-1 then joins, and
so on, one step of every active chain per global tick, so the cold chain
starts after K*(B+N) ticks. Once active, every chain keeps stepping and
keeps appending its post-burn-in points to its ring archive for the rest of
the run; frozen archives would starve the rarely visited rings.

Each step of a chain below the top is an equi-energy jump with probability
p_ee (drawing uniformly from the next-hotter chain's archive for the current
ring) and a local MH move otherwise; the top chain only takes MH moves.

All randomness derives from the master seed through one numpy generator per
chain, seeded by SeedSequence(master_seed, spawn_key=(order,)). Runs are
therefore bit-reproducible for a fixed configuration, independent of any
scheduling details.
"""

import warnings
from array import array
from dataclasses import dataclass

import numpy as np

from .kernels import (
    MOVE_EE,
    MOVE_MH,
    ChainState,
    ModeJumpProposal,
    MoveRecord,
    RandomWalkProposal,
    ee_jump_step,
    mh_step,
)
from .ladders import EnergyLadder, Ladders, TemperatureLadder, ring_index
from .targets import TargetDistribution

__all__ = [
    "PROPOSAL_RANDOM_WALK",
    "PROPOSAL_MODE_JUMP",
    "SamplerConfig",
    "RingStore",
    "ChainRings",
    "MoveTally",
    "RunOutput",
    "ChainState",
    "initialize_chain",
    "step_chain",
    "run_ee_sampler",
]

PROPOSAL_RANDOM_WALK = "random_walk"
PROPOSAL_MODE_JUMP = "mode_jump"

MOVE_CODES = (MOVE_MH, MOVE_EE)


@dataclass
class SamplerConfig:
    """Everything a run needs besides the target itself.

    burn_in (B) and ring_iters (N) are per-chain step counts: each chain
    discards its first B steps for ring purposes and its next N steps seed
    the archive before the next-colder chain starts. n_keep is the number of
    recorded cold-chain samples. tau holds one random-walk step scale per
    chain; proposal_kinds selects "random_walk" or "mode_jump" per chain.
    Initial states are uniform over the axis-aligned box [init_low, init_high].
    """

    energy_ladder: EnergyLadder
    temperature_ladder: TemperatureLadder
    p_ee: float
    burn_in: int
    ring_iters: int
    n_keep: int
    tau: np.ndarray
    proposal_kinds: tuple[str, ...]
    master_seed: int
    init_low: np.ndarray
    init_high: np.ndarray

    def __post_init__(self):
        self.tau = np.asarray(self.tau, dtype=float)
        self.init_low = np.asarray(self.init_low, dtype=float)
        self.init_high = np.asarray(self.init_high, dtype=float)
        if isinstance(self.proposal_kinds, list):
            self.proposal_kinds = tuple(self.proposal_kinds)

    @property
    def top_order(self) -> int:
        return self.energy_ladder.top_order

    @property
    def n_chains(self) -> int:
        return self.top_order + 1

    @property
    def ladders(self) -> Ladders:
        return Ladders(self.energy_ladder, self.temperature_ladder)

    def validate(self, dim: int | None = None):
        n = self.n_chains
        if len(self.temperature_ladder.temps) != n:
            raise ValueError("temperature ladder length must match the energy ladder")
        if not 0.0 <= self.p_ee <= 1.0:
            raise ValueError("p_ee must lie in [0, 1]")
        if self.burn_in < 0 or self.ring_iters < 0 or self.n_keep < 0:
            raise ValueError("burn_in, ring_iters, and n_keep must be nonnegative")
        if self.tau.shape != (n,):
            raise ValueError(f"tau must hold one step scale per chain ({n})")
        if np.any(self.tau <= 0):
            raise ValueError("all step scales must be positive")
        if len(self.proposal_kinds) != n:
            raise ValueError(f"proposal_kinds must name one proposal per chain ({n})")
        for kind in self.proposal_kinds:
            if kind not in (PROPOSAL_RANDOM_WALK, PROPOSAL_MODE_JUMP):
                raise ValueError(f"unknown proposal kind: {kind!r}")
        if self.init_low.shape != self.init_high.shape:
            raise ValueError("init_low and init_high must have the same shape")
        if np.any(self.init_low > self.init_high):
            raise ValueError("init_low must not exceed init_high")
        if dim is not None and self.init_low.shape != (dim,):
            raise ValueError(f"initial box must have dimension {dim}")
        if self.p_ee > 0 and self.top_order == 0:
            warnings.warn(
                "p_ee > 0 has no effect with a single chain; all moves are MH",
                stacklevel=2,
            )


class RingStore:
    """Append-only archives of visited states, per chain and per ring.

    Coordinates and energies live in flat double arrays, so a million stored
    points stay cheap to append and to sample from. Stored entries never
    change and stores only grow; uniform draws use the length at draw time.
    """

    def __init__(self, n_chains: int, n_rings: int, dim: int):
        self.n_chains = n_chains
        self.n_rings = n_rings
        self.dim = dim
        self._coords = [[array("d") for _ in range(n_rings)] for _ in range(n_chains)]
        self._energies = [[array("d") for _ in range(n_rings)] for _ in range(n_chains)]

    def append(self, chain: int, ring: int, x, h: float):
        self._coords[chain][ring].extend(x)
        self._energies[chain][ring].append(h)

    def count(self, chain: int, ring: int) -> int:
        return len(self._energies[chain][ring])

    def counts(self) -> np.ndarray:
        """Occupancy matrix, one row per chain and one column per ring."""
        return np.array(
            [[len(self._energies[c][j]) for j in range(self.n_rings)] for c in range(self.n_chains)],
            dtype=np.int64,
        )

    def draw(self, chain: int, ring: int, rng) -> tuple[np.ndarray, float]:
        n = len(self._energies[chain][ring])
        idx = int(rng.integers(n))
        base = idx * self.dim
        point = np.array(self._coords[chain][ring][base : base + self.dim])
        return point, self._energies[chain][ring][idx]

    def points(self, chain: int, ring: int) -> np.ndarray:
        buf = self._coords[chain][ring]
        if not buf:
            return np.empty((0, self.dim))
        return np.frombuffer(buf, dtype=np.float64).reshape(-1, self.dim)

    def energies(self, chain: int, ring: int) -> np.ndarray:
        buf = self._energies[chain][ring]
        if not buf:
            return np.empty(0)
        return np.frombuffer(buf, dtype=np.float64)

    def view(self, chain: int) -> "ChainRings":
        return ChainRings(self, chain)


class ChainRings:
    """Read view of one chain's rings, the proposal pool for jumps from below."""

    def __init__(self, store: RingStore, chain: int):
        self._store = store
        self._chain = chain

    def count(self, ring: int) -> int:
        return self._store.count(self._chain, ring)

    def draw(self, ring: int, rng) -> tuple[np.ndarray, float]:
        return self._store.draw(self._chain, ring, rng)


@dataclass
class MoveTally:
    attempted: int = 0
    accepted: int = 0


@dataclass
class RunOutput:
    """Recorded cold-chain samples plus run-level bookkeeping.

    samples holds the n_keep kept points row by row; ticks, energies, rings,
    move_types (index into MOVE_CODES), and accepted describe the step that
    produced each row. tallies maps (chain, move_type) to attempt counts,
    ring_occupancy counts archive appends per chain and ring, and stores is
    the full ring archive, kept for the partition-weight estimator.
    """

    samples: np.ndarray
    ticks: np.ndarray
    energies: np.ndarray
    rings: np.ndarray
    move_types: np.ndarray
    accepted: np.ndarray
    tallies: dict[tuple[int, str], MoveTally]
    ring_occupancy: np.ndarray
    stores: RingStore
    config: SamplerConfig

    @property
    def n_keep(self) -> int:
        return len(self.samples)

    def chain0_ring_counts(self) -> np.ndarray:
        """Ring frequencies of the kept cold-chain samples."""
        return np.bincount(self.rings, minlength=self.config.n_chains)


def initialize_chain(k: int, config: SamplerConfig, target: TargetDistribution, rng) -> ChainState:
    """Uniform draw from the configured initial box, with its energy.

    Points of zero density (infinite energy) are redrawn; a box lying
    entirely outside the support is reported instead of seeding a chain that
    could never move.
    """
    for _ in range(1000):
        x = rng.uniform(config.init_low, config.init_high)
        h = target.energy_fn(x)
        if np.isfinite(h):
            return ChainState(order=k, x=x, h=h, step_count=0)
    raise ValueError("the initial box does not intersect the target's support")


def step_chain(
    chain: ChainState,
    config: SamplerConfig,
    stores: RingStore,
    target: TargetDistribution,
    ladders: Ladders,
    rng,
    proposal=None,
) -> tuple[ChainState, MoveRecord]:
    """One step of one chain: EE jump with probability p_ee (below the top
    chain), MH move otherwise; the post-move point is archived once the
    chain is past its burn-in."""
    if proposal is None:
        proposal = _build_proposal(chain.order, config, target)
    k = chain.order
    u = rng.random()
    if u < config.p_ee and k < config.top_order:
        new_state, record = ee_jump_step(chain, stores.view(k + 1), ladders, rng)
    else:
        new_state, record = mh_step(chain, proposal, target, ladders, rng)
    if new_state.step_count > config.burn_in:
        stores.append(k, ring_index(new_state.h, ladders.energy), new_state.x, new_state.h)
    return new_state, record


def _build_proposal(k: int, config: SamplerConfig, target: TargetDistribution):
    kind = config.proposal_kinds[k]
    if kind == PROPOSAL_MODE_JUMP:
        if not target.mode_info:
            raise ValueError("mode_jump proposal requires a target with mode_info")
        return ModeJumpProposal(target.mode_info)
    return RandomWalkProposal(float(config.tau[k]))


def run_ee_sampler(config: SamplerConfig, target: TargetDistribution) -> RunOutput:
    """Run the staged multi-chain sampler and record n_keep cold-chain samples.

    Chain k takes its first step at global tick (K-k)*(B+N); the cold chain
    therefore starts at tick K*(B+N), burns B steps, and its next n_keep
    steps are recorded. The total run is K*(B+N) + B + n_keep ticks.
    """
    config.validate(dim=target.dim)
    ladders = config.ladders
    top = config.top_order
    n_chains = config.n_chains
    block = config.burn_in + config.ring_iters
    total_ticks = top * block + config.burn_in + config.n_keep

    rngs = [
        np.random.default_rng(np.random.SeedSequence(config.master_seed, spawn_key=(k,)))
        for k in range(n_chains)
    ]
    proposals = [_build_proposal(k, config, target) for k in range(n_chains)]
    starts = [(top - k) * block for k in range(n_chains)]
    chains: list[ChainState | None] = [None] * n_chains
    stores = RingStore(n_chains, n_chains, target.dim)
    tallies = {(k, mt): MoveTally() for k in range(n_chains) for mt in MOVE_CODES}

    n_keep = config.n_keep
    dim = target.dim
    kept_x = np.empty((n_keep, dim))
    kept_tick = np.empty(n_keep, dtype=np.int64)
    kept_h = np.empty(n_keep)
    kept_ring = np.empty(n_keep, dtype=np.int64)
    kept_move = np.empty(n_keep, dtype=np.uint8)
    kept_acc = np.empty(n_keep, dtype=bool)
    kept = 0
    burn_in = config.burn_in

    for tick in range(total_ticks):
        for k in range(top, -1, -1):
            if tick < starts[k]:
                break  # colder chains start even later
            if chains[k] is None:
                chains[k] = initialize_chain(k, config, target, rngs[k])
            state, record = step_chain(
                chains[k], config, stores, target, ladders, rngs[k], proposals[k]
            )
            chains[k] = state
            tally = tallies[(k, record.move_type)]
            tally.attempted += 1
            if record.accepted:
                tally.accepted += 1
            if k == 0 and state.step_count > burn_in and kept < n_keep:
                kept_x[kept] = state.x
                kept_tick[kept] = tick
                kept_h[kept] = state.h
                kept_ring[kept] = ring_index(state.h, ladders.energy)
                kept_move[kept] = MOVE_CODES.index(record.move_type)
                kept_acc[kept] = record.accepted
                kept += 1

    return RunOutput(
        samples=kept_x[:kept],
        ticks=kept_tick[:kept],
        energies=kept_h[:kept],
        rings=kept_ring[:kept],
        move_types=kept_move[:kept],
        accepted=kept_acc[:kept],
        tallies={key: t for key, t in tallies.items() if t.attempted > 0},
        ring_occupancy=stores.counts(),
        stores=stores,
        config=config,
    )
