"""Command-line harness for equi-energy sampling experiments.

Configurations are flat `key = value` documents (# starts a comment) so
experiment files diff cleanly; vectors are comma lists and matrices are
row-major comma lists, one `cov_i` per mixture component. A `preset` key (or
the --preset flag) expands to the full parameter set of one of the built-in
experiments, and any explicitly given key overrides the preset value.

Subcommands:

* run       run the sampler and write samples.csv, manifest.txt,
            tallies.csv, estimates.csv, diagnostics.csv, and acf.csv into
            the output directory (--figures also renders the report figures)
* estimate  recompute estimates.csv from an existing samples.csv
* diagnose  recompute diagnostics.csv and acf.csv from existing output
* report    render figures from existing output

Exit codes: 0 success, 1 configuration error (nothing is written), 2
runtime or I/O error.
"""

import argparse
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .diagnostics import acceptance_report, assign_modes, autocorrelation
from .estimators import (
    PartitionWeights,
    ergodic_average,
    estimate_partition_weights,
    partition_weighted_estimate,
)
from .ladders import EnergyLadder, TemperatureLadder, build_geometric_ladder
from .reports import (
    read_manifest,
    read_ring_weights,
    read_samples_csv,
    read_tallies_csv,
    render_figures,
    write_acf_csv,
    write_diagnostics_csv,
    write_estimates_csv,
    write_manifest,
    write_samples_csv,
    write_tallies_csv,
)
from .sampler import (
    PROPOSAL_MODE_JUMP,
    PROPOSAL_RANDOM_WALK,
    SamplerConfig,
    run_ee_sampler,
)
from .targets import (
    GaussianMixtureParams,
    TargetDistribution,
    gaussian_mixture_target,
    make_gamma_target,
)

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "parse_config",
    "preset_pairs",
    "build_target",
    "build_sampler_config",
    "manifest_items",
    "run_experiment",
    "main",
]

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2

PRESET_NAMES = ("example1", "example2_naive", "example2_tuned")

ESTIMATOR_NAMES = ("ergodic", "partition_weighted")
G_FUNCS = {
    "mean": lambda x: x,
    "second_moment": lambda x: x * x,
}


class ConfigError(Exception):
    """Raised for any unusable configuration; maps to exit code 1."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved experiment description with plain-Python fields."""

    preset: str | None
    target: str
    dim: int
    weights: tuple[float, ...] | None
    means: tuple[tuple[float, ...], ...] | None
    covs: tuple[tuple[float, ...], ...] | None
    gamma_shape: float | None
    gamma_rate: float | None
    energy_levels: tuple[float, ...]
    temperatures: tuple[float, ...]
    p_ee: float
    burn_in: int
    ring_iters: int
    n_keep: int
    tau: tuple[float, ...]
    proposals: tuple[str, ...]
    seed: int
    init_low: tuple[float, ...]
    init_high: tuple[float, ...]
    estimators: tuple[str, ...]
    g: tuple[str, ...]
    acf_max_lag: int
    out: str | None


# ---------------------------------------------------------------- presets


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def _fmt_list(values) -> str:
    return ",".join(_fmt(v) for v in values)


def preset_pairs(name: str, n_levels_override: int | None = None) -> dict[str, str]:
    """The full key set of a built-in experiment, as config-document values.

    `n_levels_override` replaces the preset's default K (top chain order);
    ladders are rebuilt accordingly.
    """
    if name == "example1":
        k = 2 if n_levels_override is None else n_levels_override
        h0 = 0.5
        levels = build_geometric_ladder(h0, h0 + 100.0, k + 1)
        temps = build_geometric_ladder(1.0, 60.0, k + 1)
        return {
            "target": "mixture",
            "dim": "2",
            "weights": "0.5,0.5",
            "mean_0": "0,0",
            "mean_1": "5,5",
            "cov_0": "1,0.99,0.99,1",
            "cov_1": "1,-0.99,-0.99,1",
            "K": str(k),
            "energy_levels": _fmt_list(levels),
            "temperatures": _fmt_list(temps),
            "p_ee": "0.1",
            "burn_in": "2000",
            "ring_iters": "2000",
            "n_keep": "20000",
            "tau": "0.5",
            "proposals": "random_walk",
            "init_low": "0,0",
            "init_high": "1,1",
        }
    if name in ("example2_naive", "example2_tuned"):
        pairs = {
            "target": "mixture",
            "dim": "2",
            "weights": "0.5,0.5",
            "mean_0": "0,0",
            "mean_1": "5,5",
            "cov_0": "0.0001,0,0,0.0001",
            "cov_1": "1,0,0,1",
            "burn_in": "20000",
            "ring_iters": "20000",
            "init_low": "0,0",
            "init_high": "1,1",
        }
        h0 = -7.0
        # exact minimum energy, attained essentially at the narrow mode
        params = _example2_params()
        h_min = params.energy(np.zeros(2))
        if name == "example2_naive":
            k = 2 if n_levels_override is None else n_levels_override
            levels = build_geometric_ladder(h0, h0 + 100.0, k + 1)
            temps = build_geometric_ladder(1.0, 60.0, k + 1)
            pairs.update(
                {
                    "K": str(k),
                    "energy_levels": _fmt_list(levels),
                    "temperatures": _fmt_list(temps),
                    "p_ee": "0.1",
                    "n_keep": "20000",
                    "tau": "0.5",
                    "proposals": "random_walk",
                }
            )
        else:
            k = 6 if n_levels_override is None else n_levels_override
            h1 = math.log(4.0 * math.pi) + 0.6
            levels = np.concatenate(
                [[h0], build_geometric_ladder(h1, h_min + 100.0, k)]
            )
            temps = build_geometric_ladder(1.0, 70.0, k + 1)
            pairs.update(
                {
                    "K": str(k),
                    "energy_levels": _fmt_list(levels),
                    "temperatures": _fmt_list(temps),
                    "p_ee": "0.5",
                    "n_keep": "50000",
                    "tau": "0.5",
                    "proposals": ",".join(["mode_jump"] + ["random_walk"] * k),
                }
            )
        return pairs
    raise ConfigError(f"unknown preset {name!r}")


def _example2_params() -> GaussianMixtureParams:
    return GaussianMixtureParams(
        weights=[0.5, 0.5],
        means=[[0.0, 0.0], [5.0, 5.0]],
        covariances=[np.diag([1e-4, 1e-4]), np.eye(2)],
    )


# ---------------------------------------------------------------- parsing


def _split_pairs(text: str) -> list[tuple[int, str, str]]:
    pairs = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line.strip()!r}")
        key, _, value = stripped.partition("=")
        key = key.strip()
        value = value.strip()
        if not key:
            raise ConfigError(f"line {lineno}: missing key")
        pairs.append((lineno, key, value))
    return pairs


def _as_int(key: str, value: str, lineno: int) -> int:
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"line {lineno}: malformed integer for key '{key}': {value!r}") from None


def _as_float(key: str, value: str, lineno: int) -> float:
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"line {lineno}: malformed number for key '{key}': {value!r}") from None


def _as_floats(key: str, value: str, lineno: int) -> tuple[float, ...]:
    items = [v.strip() for v in value.split(",") if v.strip()]
    if not items:
        raise ConfigError(f"line {lineno}: key '{key}' needs at least one number")
    return tuple(_as_float(key, item, lineno) for item in items)


def _as_names(value: str) -> tuple[str, ...]:
    return tuple(v.strip() for v in value.split(",") if v.strip())


def parse_config(text: str) -> ExperimentConfig:
    """Parse and fully validate a configuration document.

    Unknown keys are rejected by name, malformed numbers are reported with
    their line number, and the returned config is guaranteed to resolve to a
    valid target plus sampler configuration.
    """
    raw: dict[str, tuple[int, str]] = {}
    for lineno, key, value in _split_pairs(text):
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key '{key}'")
        raw[key] = (lineno, value)

    merged: dict[str, tuple[int, str]] = {}
    preset = None
    if "preset" in raw:
        preset = raw["preset"][1]
        if preset not in PRESET_NAMES:
            raise ConfigError(
                f"unknown preset {preset!r}; available: {', '.join(PRESET_NAMES)}"
            )
        k_override = None
        if "K" in raw:
            k_override = _as_int("K", raw["K"][1], raw["K"][0])
        merged.update({k: (0, v) for k, v in preset_pairs(preset, k_override).items()})
    merged.update({k: v for k, v in raw.items() if k != "preset"})

    def take(key):
        return merged.pop(key, None)

    def take_int(key, default=None):
        item = take(key)
        if item is None:
            return default
        return _as_int(key, item[1], item[0])

    def take_float(key, default=None):
        item = take(key)
        if item is None:
            return default
        return _as_float(key, item[1], item[0])

    def take_floats(key, default=None):
        item = take(key)
        if item is None:
            return default
        return _as_floats(key, item[1], item[0])

    def take_names(key, default=None):
        item = take(key)
        if item is None:
            return default
        return _as_names(item[1])

    target = take("target")
    if target is None:
        raise ConfigError("missing required key 'target' (or a preset providing it)")
    target = target[1]
    if target not in ("mixture", "gamma"):
        raise ConfigError(f"unknown target {target!r}; expected 'mixture' or 'gamma'")

    dim = take_int("dim", 1 if target == "gamma" else None)
    if dim is None:
        raise ConfigError("missing required key 'dim'")
    if dim < 1:
        raise ConfigError("dim must be a positive integer")

    weights = means = covs = None
    gamma_shape = gamma_rate = None
    if target == "mixture":
        weights = take_floats("weights")
        if weights is None:
            raise ConfigError("mixture target requires key 'weights'")
        means_list, covs_list = [], []
        for i in range(len(weights)):
            mean_i = take_floats(f"mean_{i}")
            cov_i = take_floats(f"cov_{i}")
            if mean_i is None or cov_i is None:
                raise ConfigError(f"mixture component {i} requires keys 'mean_{i}' and 'cov_{i}'")
            if len(mean_i) != dim:
                raise ConfigError(f"mean_{i} must have {dim} entries")
            if len(cov_i) != dim * dim:
                raise ConfigError(f"cov_{i} must have {dim * dim} row-major entries")
            means_list.append(mean_i)
            covs_list.append(cov_i)
        means = tuple(means_list)
        covs = tuple(covs_list)
    else:
        if dim != 1:
            raise ConfigError("the gamma target is one-dimensional")
        gamma_shape = take_float("gamma_shape")
        gamma_rate = take_float("gamma_rate", 1.0)
        if gamma_shape is None:
            raise ConfigError("gamma target requires key 'gamma_shape'")

    energy_levels = take_floats("energy_levels")
    temperatures = take_floats("temperatures")
    if energy_levels is None or temperatures is None:
        raise ConfigError("keys 'energy_levels' and 'temperatures' are required")
    k_declared = take_int("K")
    if k_declared is not None and k_declared != len(energy_levels) - 1:
        raise ConfigError(
            f"K = {k_declared} disagrees with {len(energy_levels)} energy levels"
        )
    n_chains = len(energy_levels)

    p_ee = take_float("p_ee", 0.1)
    if not 0.0 <= p_ee <= 1.0:
        raise ConfigError(f"p_ee must lie in [0, 1], got {p_ee}")
    burn_in = take_int("burn_in", 2000)
    ring_iters = take_int("ring_iters", burn_in)
    n_keep = take_int("n_keep", 10000)

    tau = take_floats("tau", (0.5,))
    if len(tau) == 1:
        tau = tau * n_chains
    proposals = take_names("proposals", (PROPOSAL_RANDOM_WALK,))
    if len(proposals) == 1:
        proposals = proposals * n_chains

    seed = take_int("seed", 0)
    if seed < 0:
        raise ConfigError("seed must be a nonnegative integer")
    init_low = take_floats("init_low", tuple([0.0] * dim))
    init_high = take_floats("init_high", tuple([1.0] * dim))

    estimators = take_names("estimators", ESTIMATOR_NAMES)
    for name in estimators:
        if name not in ESTIMATOR_NAMES:
            raise ConfigError(f"unknown estimator {name!r}")
    g_names = take_names("g", tuple(G_FUNCS))
    for name in g_names:
        if name not in G_FUNCS:
            raise ConfigError(f"unknown g selection {name!r}")
    acf_max_lag = take_int("acf_max_lag", 200)
    if acf_max_lag < 1:
        raise ConfigError("acf_max_lag must be at least 1")

    out_item = take("out")
    out = out_item[1] if out_item is not None else None

    if merged:
        key = sorted(merged)[0]
        raise ConfigError(f"unknown configuration key '{key}'")

    cfg = ExperimentConfig(
        preset=preset,
        target=target,
        dim=dim,
        weights=weights,
        means=means,
        covs=covs,
        gamma_shape=gamma_shape,
        gamma_rate=gamma_rate,
        energy_levels=energy_levels,
        temperatures=temperatures,
        p_ee=p_ee,
        burn_in=burn_in,
        ring_iters=ring_iters,
        n_keep=n_keep,
        tau=tau,
        proposals=proposals,
        seed=seed,
        init_low=init_low,
        init_high=init_high,
        estimators=estimators,
        g=g_names,
        acf_max_lag=acf_max_lag,
        out=out,
    )
    # surface any remaining inconsistency (ladder shapes, SPD failures, ...)
    build_target(cfg)
    build_sampler_config(cfg)
    return cfg


# ---------------------------------------------------------------- building


def build_target(cfg: ExperimentConfig) -> TargetDistribution:
    try:
        if cfg.target == "mixture":
            params = GaussianMixtureParams(
                weights=cfg.weights,
                means=[list(m) for m in cfg.means],
                covariances=[np.array(c).reshape(cfg.dim, cfg.dim) for c in cfg.covs],
            )
            return gaussian_mixture_target(params)
        return make_gamma_target(cfg.gamma_shape, cfg.gamma_rate)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def build_sampler_config(cfg: ExperimentConfig) -> SamplerConfig:
    try:
        sampler_config = SamplerConfig(
            energy_ladder=EnergyLadder(np.array(cfg.energy_levels)),
            temperature_ladder=TemperatureLadder(np.array(cfg.temperatures)),
            p_ee=cfg.p_ee,
            burn_in=cfg.burn_in,
            ring_iters=cfg.ring_iters,
            n_keep=cfg.n_keep,
            tau=np.array(cfg.tau),
            proposal_kinds=cfg.proposals,
            master_seed=cfg.seed,
            init_low=np.array(cfg.init_low),
            init_high=np.array(cfg.init_high),
        )
        sampler_config.validate(dim=cfg.dim)
        if PROPOSAL_MODE_JUMP in cfg.proposals and cfg.target != "mixture":
            raise ValueError("mode_jump proposals require a mixture target with declared modes")
        return sampler_config
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def manifest_items(cfg: ExperimentConfig) -> list[tuple[str, str]]:
    """Every effective parameter as config-document pairs; parsing the
    manifest text reproduces the config exactly."""
    items: list[tuple[str, str]] = []
    if cfg.preset:
        items.append(("preset", cfg.preset))
    items.append(("target", cfg.target))
    items.append(("dim", str(cfg.dim)))
    if cfg.target == "mixture":
        items.append(("weights", _fmt_list(cfg.weights)))
        for i, (mean, cov) in enumerate(zip(cfg.means, cfg.covs)):
            items.append((f"mean_{i}", _fmt_list(mean)))
            items.append((f"cov_{i}", _fmt_list(cov)))
    else:
        items.append(("gamma_shape", _fmt(cfg.gamma_shape)))
        items.append(("gamma_rate", _fmt(cfg.gamma_rate)))
    items.extend(
        [
            ("K", str(len(cfg.energy_levels) - 1)),
            ("energy_levels", _fmt_list(cfg.energy_levels)),
            ("temperatures", _fmt_list(cfg.temperatures)),
            ("p_ee", _fmt(cfg.p_ee)),
            ("burn_in", str(cfg.burn_in)),
            ("ring_iters", str(cfg.ring_iters)),
            ("n_keep", str(cfg.n_keep)),
            ("tau", _fmt_list(cfg.tau)),
            ("proposals", ",".join(cfg.proposals)),
            ("seed", str(cfg.seed)),
            ("init_low", _fmt_list(cfg.init_low)),
            ("init_high", _fmt_list(cfg.init_high)),
            ("estimators", ",".join(cfg.estimators)),
            ("g", ",".join(cfg.g)),
            ("acf_max_lag", str(cfg.acf_max_lag)),
        ]
    )
    if cfg.out is not None:
        items.append(("out", cfg.out))
    return items


# ---------------------------------------------------------------- pipeline


def _estimate_rows(cfg, samples, rings, weights: PartitionWeights, pooled_n: int):
    rows = []
    for g_label in cfg.g:
        g = G_FUNCS[g_label]
        if "ergodic" in cfg.estimators:
            res = ergodic_average(samples, g)
            rows.extend(
                ("ergodic", g_label, comp, res.value[comp], res.n_used)
                for comp in range(len(res.value))
            )
        if "partition_weighted" in cfg.estimators:
            res = partition_weighted_estimate(samples, rings, weights, g)
            rows.extend(
                ("partition_weighted", g_label, comp, res.value[comp], res.n_used)
                for comp in range(len(res.value))
            )
    if "partition_weighted" in cfg.estimators:
        rows.extend(
            ("ring_weight", "", j, weights.w[j], pooled_n) for j in range(len(weights.w))
        )
        rows.extend(
            ("ring_weight_flagged", "", j, 0.0, pooled_n)
            for j in weights.zero_frequency_rings
        )
    return rows


def _diagnostic_rows(cfg, target, samples, tallies):
    rows = []
    for (chain, move_type), rate in acceptance_report(tallies).items():
        rows.append(("acceptance_rate", chain, move_type, None, rate))
    if target.mode_info:
        trace = assign_modes(samples, target.mode_info)
        for mode, occ in enumerate(trace.occupancy):
            rows.append(("mode_occupancy", None, None, mode, occ))
        rows.append(("mode_switch_count", None, None, None, trace.switch_count))
    return rows


def _acf_columns(cfg, samples):
    max_lag = min(cfg.acf_max_lag, len(samples) - 1)
    if max_lag < 1:
        return None
    columns = []
    for i in range(samples.shape[1]):
        try:
            columns.append(autocorrelation(samples[:, i], max_lag).acf)
        except ValueError:
            return None  # constant coordinate, nothing meaningful to report
    return np.arange(max_lag + 1), columns


def _partition_weights_for_run(cfg, out):
    """Estimated ring weights, or unit weights when no hotter chain exists."""
    if len(cfg.energy_levels) == 1:
        return PartitionWeights(np.ones(1)), 0
    weights = estimate_partition_weights(out.stores, out.chain0_ring_counts(), out.config.ladders)
    pooled = int(out.ring_occupancy[1:].sum())
    return weights, pooled


def run_experiment(cfg: ExperimentConfig, figures: bool = False) -> int:
    """Run the sampler and write all output files; returns an exit code."""
    try:
        target = build_target(cfg)
        sampler_config = build_sampler_config(cfg)
    except ConfigError as exc:
        print(f"ee-lab: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if cfg.out is None:
        print("ee-lab: config error: no output directory set", file=sys.stderr)
        return EXIT_CONFIG

    try:
        started = time.perf_counter()
        out_dir = Path(cfg.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        out = run_ee_sampler(sampler_config, target)

        write_manifest(out_dir / "manifest.txt", manifest_items(cfg))
        write_samples_csv(out_dir / "samples.csv", out)
        write_tallies_csv(out_dir / "tallies.csv", out.tallies)

        weights, pooled = _partition_weights_for_run(cfg, out)
        write_estimates_csv(
            out_dir / "estimates.csv",
            _estimate_rows(cfg, out.samples, out.rings, weights, pooled),
        )
        write_diagnostics_csv(
            out_dir / "diagnostics.csv",
            _diagnostic_rows(cfg, target, out.samples, out.tallies),
        )
        acf = _acf_columns(cfg, out.samples)
        if acf is not None:
            write_acf_csv(out_dir / "acf.csv", acf[0], acf[1])
        if figures:
            render_figures(out_dir, _mode_locations(target))
        elapsed = time.perf_counter() - started
        print(f"ee-lab: wrote {out_dir} (seed {cfg.seed}, {out.n_keep} samples, {elapsed:.1f}s)")
        return EXIT_OK
    except OSError as exc:
        print(f"ee-lab: I/O error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (ValueError, RuntimeError) as exc:
        print(f"ee-lab: runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def _mode_locations(target: TargetDistribution):
    if not target.mode_info:
        return None
    return np.stack([m.location for m in target.mode_info])


def _config_from_dir(out_dir: Path) -> ExperimentConfig:
    manifest = out_dir / "manifest.txt"
    if not manifest.exists():
        raise ConfigError(f"no manifest.txt in {out_dir}")
    return parse_config(read_manifest(manifest))


def cmd_estimate(out_dir: str) -> int:
    """Recompute estimates.csv over an existing samples.csv, reusing the
    stored ring weights (unit weights if none were stored)."""
    out_dir = Path(out_dir)
    try:
        cfg = _config_from_dir(out_dir)
        data = read_samples_csv(out_dir / "samples.csv")
        stored = read_ring_weights(out_dir / "estimates.csv")
        n_rings = len(cfg.energy_levels)
        pooled = 0
        if stored is not None and len(stored[0]) == n_rings:
            weights = PartitionWeights(stored[0], zero_frequency_rings=stored[1])
            pooled = stored[2]
        else:
            weights = PartitionWeights(np.ones(n_rings))
        rows = _estimate_rows(cfg, data["samples"], data["rings"], weights, pooled)
        write_estimates_csv(out_dir / "estimates.csv", rows)
        print(f"ee-lab: rewrote {out_dir / 'estimates.csv'}")
        return EXIT_OK
    except ConfigError as exc:
        print(f"ee-lab: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"ee-lab: I/O error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def cmd_diagnose(out_dir: str) -> int:
    """Recompute diagnostics.csv and acf.csv from existing output files."""
    out_dir = Path(out_dir)
    try:
        cfg = _config_from_dir(out_dir)
        target = build_target(cfg)
        data = read_samples_csv(out_dir / "samples.csv")
        tallies = read_tallies_csv(out_dir / "tallies.csv")
        write_diagnostics_csv(
            out_dir / "diagnostics.csv",
            _diagnostic_rows(cfg, target, data["samples"], tallies),
        )
        acf = _acf_columns(cfg, data["samples"])
        if acf is not None:
            write_acf_csv(out_dir / "acf.csv", acf[0], acf[1])
        print(f"ee-lab: rewrote diagnostics for {out_dir}")
        return EXIT_OK
    except ConfigError as exc:
        print(f"ee-lab: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"ee-lab: I/O error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def cmd_report(out_dir: str) -> int:
    """Render the report figures next to the delimited output."""
    out_dir = Path(out_dir)
    try:
        cfg = _config_from_dir(out_dir)
        target = build_target(cfg)
        written = render_figures(out_dir, _mode_locations(target))
        print("ee-lab: rendered " + ", ".join(str(p) for p in written))
        return EXIT_OK
    except ConfigError as exc:
        print(f"ee-lab: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"ee-lab: I/O error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


# ---------------------------------------------------------------- main


def _load_run_config(args) -> ExperimentConfig:
    if args.config and args.preset:
        raise ConfigError("give either --config or --preset, not both")
    if args.config:
        path = Path(args.config)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        cfg = parse_config(path.read_text())
    elif args.preset:
        cfg = parse_config(f"preset = {args.preset}\n")
    else:
        raise ConfigError("one of --config or --preset is required")
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if args.out is not None:
        cfg = replace(cfg, out=args.out)
    if cfg.out is None:
        cfg = replace(cfg, out=str(Path("runs") / (cfg.preset or "experiment")))
    return cfg


def _run_replicate(payload) -> int:
    cfg, figures = payload
    return run_experiment(cfg, figures=figures)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="ee-lab",
        description="Equi-energy sampler experiments: run, estimate, diagnose, report.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run an experiment and write its output files")
    run_p.add_argument("--config", help="path to a key = value configuration file")
    run_p.add_argument("--preset", choices=PRESET_NAMES, help="built-in experiment")
    run_p.add_argument("--seed", type=int, help="master seed (overrides the config file)")
    run_p.add_argument("--out", help="output directory")
    run_p.add_argument(
        "--replications",
        type=int,
        default=1,
        metavar="R",
        help="run R independent seeds concurrently, one subdirectory each",
    )
    run_p.add_argument("--figures", action="store_true", help="also render report figures")

    for name, help_text in (
        ("estimate", "recompute estimates.csv from existing output"),
        ("diagnose", "recompute diagnostics.csv and acf.csv from existing output"),
        ("report", "render figures from existing output"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--out", required=True, help="existing run directory")

    args = parser.parse_args(argv)

    if args.command == "estimate":
        return cmd_estimate(args.out)
    if args.command == "diagnose":
        return cmd_diagnose(args.out)
    if args.command == "report":
        return cmd_report(args.out)

    try:
        cfg = _load_run_config(args)
    except ConfigError as exc:
        print(f"ee-lab: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.replications < 1:
        print("ee-lab: config error: --replications must be at least 1", file=sys.stderr)
        return EXIT_CONFIG
    if args.replications == 1:
        return run_experiment(cfg, figures=args.figures)

    payloads = [
        (
            replace(cfg, seed=cfg.seed + r, out=str(Path(cfg.out) / f"rep_{r:03d}")),
            args.figures,
        )
        for r in range(args.replications)
    ]
    workers = min(args.replications, os.cpu_count() or 1)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        codes = list(pool.map(_run_replicate, payloads))
    return max(codes)


if __name__ == "__main__":
    sys.exit(main())
