"""Equi-energy sampler: ring-confined jumps between tempered chains, local
Metropolis-Hastings moves, partition-weighted estimation, and mixing
diagnostics."""

from .diagnostics import (
    AcfResult,
    ModeMoments,
    ModeTrace,
    acceptance_report,
    assign_modes,
    autocorrelation,
    per_mode_moments,
)
from .estimators import (
    EstimateResult,
    PartitionWeights,
    ergodic_average,
    estimate_partition_weights,
    partition_weighted_estimate,
)
from .kernels import (
    ChainState,
    ModeJumpProposal,
    MoveRecord,
    RandomWalkProposal,
    ee_jump_step,
    mh_step,
    propose_mode_jump,
    propose_random_walk,
)
from .ladders import (
    EnergyLadder,
    Ladders,
    TemperatureLadder,
    build_geometric_ladder,
    ring_index,
    tempered_log_density,
)
from .sampler import (
    MoveTally,
    RingStore,
    RunOutput,
    SamplerConfig,
    initialize_chain,
    run_ee_sampler,
    step_chain,
)
from .targets import (
    GaussianMixtureParams,
    ModeDescriptor,
    TargetDistribution,
    gaussian_mixture_target,
    make_example1,
    make_example2,
    make_gamma_target,
    mixture_energy,
)

__version__ = "0.1.0"
