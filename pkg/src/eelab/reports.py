"""Run artifacts: delimited output files and rendered figures.

File schemas (all floats written with 17 significant digits, so parsing a
file back reproduces the binary values exactly):

* samples.csv      tick, x1..xd, energy, ring, move_type, accepted
* tallies.csv      chain, move_type, attempted, accepted
* estimates.csv    estimator, g, component, value, n_used
                   (ring weights appear as estimator "ring_weight", one row
                   per ring; rings flagged for zero cold-chain frequency use
                   estimator "ring_weight_flagged")
* diagnostics.csv  metric, chain, move_type, mode, value
* acf.csv          lag, acf_x1..acf_xd
* manifest.txt     `key = value` lines, itself a parseable configuration

The report path renders three figures next to the CSVs: per-coordinate
sample paths, the sample cloud (scatter in 2-D, histogram in 1-D), and the
autocorrelation decay.
"""

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .sampler import MOVE_CODES, MoveTally, RunOutput

__all__ = [
    "write_samples_csv",
    "read_samples_csv",
    "write_tallies_csv",
    "read_tallies_csv",
    "write_estimates_csv",
    "read_ring_weights",
    "write_diagnostics_csv",
    "write_acf_csv",
    "read_acf_csv",
    "write_manifest",
    "read_manifest",
    "render_figures",
]


def _fmt(value) -> str:
    return format(float(value), ".17g")


def write_samples_csv(path, out: RunOutput):
    dim = out.samples.shape[1]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["tick"] + [f"x{i + 1}" for i in range(dim)] + ["energy", "ring", "move_type", "accepted"]
        )
        for i in range(out.n_keep):
            writer.writerow(
                [int(out.ticks[i])]
                + [_fmt(v) for v in out.samples[i]]
                + [_fmt(out.energies[i]), int(out.rings[i]), MOVE_CODES[out.move_types[i]], int(out.accepted[i])]
            )


def read_samples_csv(path) -> dict:
    """Arrays keyed as ticks, samples, energies, rings, move_types, accepted."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        dim = len(header) - 5
        ticks, rows, energies, rings, moves, accepted = [], [], [], [], [], []
        for row in reader:
            ticks.append(int(row[0]))
            rows.append([float(v) for v in row[1 : 1 + dim]])
            energies.append(float(row[1 + dim]))
            rings.append(int(row[2 + dim]))
            moves.append(MOVE_CODES.index(row[3 + dim]))
            accepted.append(bool(int(row[4 + dim])))
    return {
        "ticks": np.array(ticks, dtype=np.int64),
        "samples": np.array(rows, dtype=float).reshape(len(rows), dim),
        "energies": np.array(energies),
        "rings": np.array(rings, dtype=np.int64),
        "move_types": np.array(moves, dtype=np.uint8),
        "accepted": np.array(accepted, dtype=bool),
    }


def write_tallies_csv(path, tallies: dict[tuple[int, str], MoveTally]):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["chain", "move_type", "attempted", "accepted"])
        for (chain, move_type), tally in sorted(tallies.items()):
            writer.writerow([chain, move_type, tally.attempted, tally.accepted])


def read_tallies_csv(path) -> dict[tuple[int, str], MoveTally]:
    tallies = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        for chain, move_type, attempted, accepted in reader:
            tallies[(int(chain), move_type)] = MoveTally(int(attempted), int(accepted))
    return tallies


def write_estimates_csv(path, rows: list[tuple]):
    """Rows are (estimator, g, component, value, n_used)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["estimator", "g", "component", "value", "n_used"])
        for estimator, g_label, component, value, n_used in rows:
            writer.writerow([estimator, g_label, component, _fmt(value), n_used])


def read_ring_weights(path) -> tuple[np.ndarray, tuple[int, ...], int] | None:
    """Ring weights stored in estimates.csv as (vector, flagged rings,
    pooled sample count), or None if the file holds no weight rows."""
    path = Path(path)
    if not path.exists():
        return None
    weights = {}
    flagged = []
    pooled = 0
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        for estimator, _g, component, value, n_used in reader:
            if estimator == "ring_weight":
                weights[int(component)] = float(value)
                pooled = int(n_used)
            elif estimator == "ring_weight_flagged":
                flagged.append(int(component))
    if not weights:
        return None
    vector = np.array([weights[j] for j in sorted(weights)])
    return vector, tuple(sorted(flagged)), pooled


def write_diagnostics_csv(path, rows: list[tuple]):
    """Rows are (metric, chain, move_type, mode, value); blanks where not
    applicable."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["metric", "chain", "move_type", "mode", "value"])
        for metric, chain, move_type, mode, value in rows:
            writer.writerow(
                [
                    metric,
                    "" if chain is None else chain,
                    "" if move_type is None else move_type,
                    "" if mode is None else mode,
                    _fmt(value),
                ]
            )


def write_acf_csv(path, lags: np.ndarray, acf_columns: list[np.ndarray]):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["lag"] + [f"acf_x{i + 1}" for i in range(len(acf_columns))])
        for row_idx, lag in enumerate(lags):
            writer.writerow([int(lag)] + [_fmt(col[row_idx]) for col in acf_columns])


def read_acf_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Returns (lags, acf matrix with one column per coordinate)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        lags, rows = [], []
        for row in reader:
            lags.append(int(row[0]))
            rows.append([float(v) for v in row[1:]])
    return np.array(lags), np.array(rows).reshape(len(rows), len(header) - 1)


def write_manifest(path, items: list[tuple[str, str]]):
    with open(path, "w") as fh:
        fh.write("# run manifest: every effective parameter, including defaults\n")
        for key, value in items:
            fh.write(f"{key} = {value}\n")


def read_manifest(path) -> str:
    with open(path) as fh:
        return fh.read()


def _thin(n: int, limit: int = 20000) -> np.ndarray:
    if n <= limit:
        return np.arange(n)
    return np.linspace(0, n - 1, limit).astype(np.int64)


def render_figures(out_dir, mode_locations: np.ndarray | None = None) -> list[Path]:
    """Render trace, sample-cloud, and ACF figures from the CSVs in out_dir.

    Returns the list of files written. acf.csv is optional; the ACF figure
    is skipped when it is missing.
    """
    out_dir = Path(out_dir)
    data = read_samples_csv(out_dir / "samples.csv")
    samples = data["samples"]
    n, dim = samples.shape
    written: list[Path] = []

    keep = _thin(n)
    fig, axes = plt.subplots(dim, 1, figsize=(8, 2.2 * dim), sharex=True, squeeze=False)
    for i in range(dim):
        ax = axes[i, 0]
        ax.plot(keep, samples[keep, i], lw=0.3, color="tab:blue")
        ax.set_ylabel(f"x{i + 1}")
    axes[-1, 0].set_xlabel("kept sample index")
    fig.suptitle("Cold-chain sample paths")
    fig.tight_layout()
    trace_path = out_dir / "fig_trace.png"
    fig.savefig(trace_path, dpi=120)
    plt.close(fig)
    written.append(trace_path)

    fig, ax = plt.subplots(figsize=(6, 6) if dim == 2 else (7, 4))
    if dim == 2:
        ax.scatter(samples[keep, 0], samples[keep, 1], s=2, alpha=0.3, color="tab:blue")
        if mode_locations is not None:
            ax.scatter(
                mode_locations[:, 0], mode_locations[:, 1],
                marker="x", s=80, color="tab:red", label="declared modes",
            )
            ax.legend(loc="best")
        ax.set_xlabel("x1")
        ax.set_ylabel("x2")
        ax.set_title("Cold-chain samples")
    else:
        ax.hist(samples[:, 0], bins=80, density=True, color="tab:blue", alpha=0.8)
        ax.set_xlabel("x1")
        ax.set_ylabel("density")
        ax.set_title("Cold-chain sample histogram")
    fig.tight_layout()
    cloud_path = out_dir / "fig_samples.png"
    fig.savefig(cloud_path, dpi=120)
    plt.close(fig)
    written.append(cloud_path)

    acf_file = out_dir / "acf.csv"
    if acf_file.exists():
        lags, acf = read_acf_csv(acf_file)
        fig, ax = plt.subplots(figsize=(7, 4))
        for i in range(acf.shape[1]):
            ax.plot(lags, acf[:, i], lw=1.2, label=f"x{i + 1}")
        ax.axhline(0.0, color="gray", lw=0.8)
        ax.set_xlabel("lag")
        ax.set_ylabel("autocorrelation")
        ax.set_title("Cold-chain autocorrelation")
        ax.legend(loc="best")
        fig.tight_layout()
        acf_path = out_dir / "fig_acf.png"
        fig.savefig(acf_path, dpi=120)
        plt.close(fig)
        written.append(acf_path)

    return written
