#!/usr/bin/env python3
"""Overlay of analytic and lattice density profiles from a density-profile
dataset (columns X, rho_analytic [, rho_lattice])."""

import argparse
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from plotcsv import SchemaError, read_dataset, require_columns


def render(csv_path: str, out_path: str) -> None:
    columns, metadata = read_dataset(csv_path)
    require_columns(columns, ("X", "rho_analytic"), "profile-overlay")
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.plot(columns["X"], columns["rho_analytic"], "-", color="#1f5fbf",
            label="analytic", lw=1.8)
    if "rho_lattice" in columns:
        ax.plot(columns["X"], columns["rho_lattice"], ".", color="#d62728",
                ms=4, label="lattice")
    ax.set_xlabel("X")
    ax.set_ylabel("density")
    ax.set_ylim(-0.05, 1.05)
    ax.legend(loc="best")
    cfg = metadata.get("config", {})
    ax.set_title(f"alpha={cfg.get('alpha')} lambda={cfg.get('lam')}")
    fig.savefig(out_path, dpi=110)
    plt.close(fig)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("csv")
    ap.add_argument("--out", required=True)
    args = ap.parse_args(argv)
    try:
        render(args.csv, args.out)
    except (SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
