"""Plot experiment CSVs (optional; needs matplotlib).

    python3 scripts/plot_results.py results/sweep_k.csv [more.csv ...] --out figs/
"""

import argparse
from collections import defaultdict
from pathlib import Path

from secrecy_sdp.sim import read_csv

XLABELS = {
    "sweep-k": "number of Eves K",
    "sweep-rho": "Eve channel variance",
    "sweep-power": "power budget (dB)",
    "robust-sweep-alpha-e": "Eve uncertainty ratio",
    "robust-sweep-power": "power budget (dB)",
    "robust-sweep-rho": "Eve channel variance",
}


def plot(path, out_dir):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    rows = read_csv(path)
    series = defaultdict(list)
    for r in rows:
        series[r.method].append((r.sweep_value, r.mean_rate, r.frac_nonneg))
    experiment = rows[0].experiment
    robust = experiment.startswith("robust")
    ncols = 2 if experiment == "robust-sweep-alpha-e" else 1
    fig, axes = plt.subplots(1, ncols, figsize=(5 * ncols, 4), squeeze=False)
    for method, pts in series.items():
        pts.sort()
        xs = [p[0] for p in pts]
        axes[0, 0].plot(xs, [p[1] for p in pts], marker="o", label=method)
        if ncols == 2:
            axes[0, 1].plot(xs, [p[2] for p in pts], marker="o", label=method)
    axes[0, 0].set_ylabel("worst-case secrecy rate (bits/s/Hz)" if robust else "secrecy rate (bits/s/Hz)")
    if ncols == 2:
        axes[0, 1].set_ylabel("fraction of trials with nonnegative rate")
    for ax in axes[0]:
        ax.set_xlabel(XLABELS.get(experiment, "sweep value"))
        ax.grid(alpha=0.3)
        ax.legend()
    if experiment in ("sweep-rho", "robust-sweep-rho"):
        for ax in axes[0]:
            ax.set_xscale("log")
    fig.tight_layout()
    target = Path(out_dir) / (Path(path).stem + ".png")
    target.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(target, dpi=120)
    print(f"wrote {target}")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("csv", nargs="+")
    parser.add_argument("--out", default="figs")
    args = parser.parse_args()
    for path in args.csv:
        plot(path, args.out)


if __name__ == "__main__":
    main()
