"""Energy and temperature ladders, ring classification, and the working
density of each chain.

The state space is partitioned into energy rings: ring j collects the points
whose energy falls in [H_j, H_{j+1}), with the level above the top treated
as +inf. Chain k works against the flattened, tempered density

    pi_k(x) proportional to exp(-max(h(x), H_k) / T_k),

which is flat below H_k and heated by T_k above it. Chain 0 has T_0 = 1 and
H_0 at or below the minimum energy, so it targets pi itself.
"""

import math
from bisect import bisect_right
from dataclasses import dataclass

import numpy as np

__all__ = [
    "EnergyLadder",
    "TemperatureLadder",
    "Ladders",
    "build_geometric_ladder",
    "ring_index",
    "tempered_log_density",
]


def _require_strictly_increasing(values: np.ndarray, name: str):
    if len(values) == 0:
        raise ValueError(f"{name} must contain at least one level")
    if not np.all(np.isfinite(values)):
        raise ValueError(f"{name} must be finite")
    if len(values) > 1 and not np.all(np.diff(values) > 0):
        raise ValueError(f"{name} must be strictly increasing")


@dataclass
class EnergyLadder:
    """Levels H_0 < H_1 < ... < H_K; the implicit level above H_K is +inf."""

    levels: np.ndarray

    def __post_init__(self):
        self.levels = np.asarray(self.levels, dtype=float)
        _require_strictly_increasing(self.levels, "energy levels")
        # plain list for fast scalar bisection in the sampling loop
        self._level_list = [float(v) for v in self.levels]

    @property
    def top_order(self) -> int:
        """K, the index of the last level (number of rings minus one)."""
        return len(self.levels) - 1


@dataclass
class TemperatureLadder:
    """Temperatures 1 = T_0 < T_1 < ... < T_K."""

    temps: np.ndarray

    def __post_init__(self):
        self.temps = np.asarray(self.temps, dtype=float)
        _require_strictly_increasing(self.temps, "temperatures")
        if self.temps[0] != 1.0:
            raise ValueError("the first temperature must be exactly 1")
        self._temp_list = [float(v) for v in self.temps]

    @property
    def top_order(self) -> int:
        return len(self.temps) - 1


@dataclass
class Ladders:
    """An energy ladder paired with a temperature ladder of equal length."""

    energy: EnergyLadder
    temperature: TemperatureLadder

    def __post_init__(self):
        if len(self.energy.levels) != len(self.temperature.temps):
            raise ValueError("energy and temperature ladders must have equal length")

    @property
    def top_order(self) -> int:
        return self.energy.top_order


def build_geometric_ladder(low: float, high: float, count: int) -> np.ndarray:
    """`count` strictly increasing values from `low` to `high`, geometric in
    shifted coordinates.

    For low > 0 the values are low * r^j with r = (high/low)^(1/(count-1)).
    For low <= 0 the ladder is built geometrically on [1, high + (1 - low)]
    and shifted back, which keeps the construction well defined for negative
    anchors. Both endpoints are hit exactly.
    """
    low = float(low)
    high = float(high)
    count = int(count)
    if count < 1:
        raise ValueError("count must be at least 1")
    if high < low:
        raise ValueError("high must not be below low")
    if count == 1:
        if high != low:
            raise ValueError("a single-level ladder requires high == low")
        return np.array([low])
    if high == low:
        raise ValueError("count >= 2 requires high > low")
    shift = 0.0 if low > 0 else 1.0 - low
    values = np.exp(np.linspace(math.log(low + shift), math.log(high + shift), count)) - shift
    values[0] = low
    values[-1] = high
    return values


def ring_index(h: float, ladder: EnergyLadder) -> int:
    """Ring of a point with energy h: the largest j with H_j <= h.

    Energies below H_0 clamp to ring 0 (H_0 is a user-chosen floor that may
    sit below every realized energy), and anything at or above H_K, the +inf
    sentinel included, lands in the unbounded top ring K.
    """
    j = bisect_right(ladder._level_list, h) - 1
    if j < 0:
        return 0
    return j


def tempered_log_density(h: float, k: int, ladders: Ladders) -> float:
    """Unnormalized log working density of chain k at energy h:
    -max(h, H_k) / T_k."""
    level = ladders.energy._level_list[k]
    if h < level:
        h = level
    return -h / ladders.temperature._temp_list[k]
