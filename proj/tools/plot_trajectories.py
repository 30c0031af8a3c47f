#!/usr/bin/env python3
"""Plot norm_err and consensus_err from the trajectory CSVs of one run directory."""

import argparse
import csv
import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def load(path):
    with open(path, newline="") as f:
        rows = list(csv.DictReader(f))
    k = [int(r["k"]) for r in rows]
    return k, [float(r["norm_err"]) for r in rows], [float(r["consensus_err"]) for r in rows]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("run_dir", type=pathlib.Path)
    ap.add_argument("-o", "--output", type=pathlib.Path, default=None)
    args = ap.parse_args()

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    for path in sorted(args.run_dir.glob("trajectory_seed*.csv")):
        k, err, cons = load(path)
        label = path.stem.removeprefix("trajectory_")
        ax1.semilogy(k, err, label=label)
        ax2.semilogy(k[1:], cons[1:], label=label)
    ax1.set(xlabel="round k", ylabel="||x - x*|| / ||x*||")
    ax2.set(xlabel="round k", ylabel="consensus error")
    ax1.legend()
    fig.tight_layout()
    fig.savefig(args.output or args.run_dir / "trajectories.png", dpi=120)


if __name__ == "__main__":
    main()
