#!/usr/bin/env python3
"""Edge-value convergence figure from a converge dataset (columns L,
value), with the dataset's own linear extrapolation drawn in an inset
against the inverse-power abscissa recorded in its metadata."""

import argparse
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from plotcsv import SchemaError, read_dataset, require_columns


def render(csv_path: str, out_path: str) -> None:
    columns, metadata = read_dataset(csv_path)
    require_columns(columns, ("L", "value"), "convergence")
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.plot(columns["L"], columns["value"], "o-", color="#1f5fbf")
    ax.set_xlabel("L")
    ax.set_ylabel("rescaled edge value")
    cfg = metadata.get("config", {})
    ax.set_title(f"{cfg.get('kind', 'edge')} convergence, sigma={cfg.get('sigma')}")

    exponent = metadata.get("scale_exponent", 1 / 3)
    xs = [L ** (-exponent) for L in columns["L"]]
    inset = fig.add_axes((0.58, 0.2, 0.3, 0.28))
    inset.plot(xs, columns["value"], "o", color="#1f5fbf", ms=4)
    fit = metadata.get("fit")
    if fit:
        slope = fit["slope"]
        intercept = fit["intercept"]
        grid = [0.0, max(xs) * 1.05]
        inset.plot(grid, [intercept + slope * g for g in grid], "-",
                   color="#d62728", lw=1.0)
        inset.plot([0.0], [intercept], "s", color="#d62728", ms=5)
    inset.set_xlabel(f"L^(-{exponent:.3g})", fontsize=8)
    inset.tick_params(labelsize=7)
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
