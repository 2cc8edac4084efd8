#!/usr/bin/env python3
"""Kernel-diagonal comparison figure from a kernel dataset (columns s,
kernel [, two_airy]): the limiting curve with optional overlay series."""

import argparse
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from plotcsv import SchemaError, read_dataset, require_columns

SERIES_STYLE = {
    "kernel": dict(fmt="-", color="#1f5fbf", lw=1.8),
    "two_airy": dict(fmt="--", color="#2ca02c", lw=1.4),
}


def render(csv_path: str, out_path: str) -> None:
    columns, metadata = read_dataset(csv_path)
    require_columns(columns, ("s", "kernel"), "kernel-compare")
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for name, series in columns.items():
        if name in ("s", "abs_diff"):
            continue
        style = SERIES_STYLE.get(name, dict(fmt=":", color="#7f7f7f", lw=1.2))
        ax.plot(columns["s"], series, style["fmt"], color=style["color"],
                lw=style["lw"], label=name)
    ax.set_xlabel("s")
    ax.set_ylabel("kernel diagonal")
    ax.legend(loc="best")
    cfg = metadata.get("config", {})
    ax.set_title(f"{cfg.get('kind', 'kernel')} sigma={cfg.get('sigma')}")
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
