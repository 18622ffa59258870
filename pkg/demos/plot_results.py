"""Turn a run's CSV outputs into figures.

Thin post-processing over what `rhilc run` / `rhilc sweep` wrote; the
CSVs are the contract, the plots are a convenience.

    python demos/plot_results.py out/nominal
"""

import csv
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def read_csv(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(c) for c in row] for row in reader]
    return header, rows


def main(out_dir):
    out = Path(out_dir)

    header, rows = read_csv(out / "trajectory.csv")
    n_state = sum(1 for h in header if h.startswith("x_"))
    iterations = sorted({int(r[0]) for r in rows})
    fig, axes = plt.subplots(2, 1, figsize=(9, 6), sharex=True)
    t = range(len(rows))
    axes[0].plot(t, [r[2] for r in rows], label="x_1")
    axes[0].plot(t, [r[2 + n_state] for r in rows], "--", label="r_1", alpha=0.7)
    axes[1].plot(t, [r[2 + n_state - 1] for r in rows], label="u", color="tab:green")
    for ax in axes:
        for j in iterations[1:]:
            ax.axvline(j * len(rows) // len(iterations), color="0.85", lw=0.5)
        ax.legend(loc="upper right")
    axes[0].set_ylabel("state 1 vs reference")
    axes[1].set_ylabel("input")
    axes[1].set_xlabel("timestep (iterations concatenated)")
    fig.tight_layout()
    fig.savefig(out / "trajectory.png", dpi=120)

    header, rows = read_csv(out / "convergence.csv")
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogy([r[0] for r in rows], [r[1] for r in rows], "o-")
    ax.set_xlabel("iteration")
    ax.set_ylabel("||z_j - z_inf||")
    fig.tight_layout()
    fig.savefig(out / "convergence.png", dpi=120)

    sweep = out / "sweep.csv"
    if sweep.exists():
        header, rows = read_csv(sweep)
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.semilogy([r[0] for r in rows], [r[2] for r in rows], "s-")
        ax.set_xlabel("prediction horizon n_i")
        ax.set_ylabel("||z_inf - z_opt||")
        fig.tight_layout()
        fig.savefig(out / "sweep.png", dpi=120)

    print(f"wrote figures next to the CSVs in {out}")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "out/nominal")
