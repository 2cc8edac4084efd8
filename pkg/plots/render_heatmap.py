#!/usr/bin/env python3
"""Density heatmap from a density-map dataset (columns x, y, rho, crazy).

Blue marks empty sites, yellow fully occupied ones; cells whose value left
[0, 1] (possible off-axis once second-neighbor hopping is on) render in a
distinct overflow color instead of being clipped into the colormap.
"""

import argparse
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
from matplotlib.colors import LinearSegmentedColormap

from plotcsv import SchemaError, read_dataset, require_columns

OVERFLOW_COLOR = (0.86, 0.08, 0.24, 1.0)  # crimson
DENSITY_CMAP = LinearSegmentedColormap.from_list("bluyel", ["#0000ff", "#ffff00"])


def render(csv_path: str, out_path: str) -> None:
    columns, metadata = read_dataset(csv_path)
    require_columns(columns, ("x", "y", "rho", "crazy"), "heatmap")
    xs = sorted(set(columns["x"]))
    ys = sorted(set(columns["y"]))
    nx, ny = len(xs), len(ys)
    if nx * ny != len(columns["x"]):
        raise SchemaError("heatmap needs a full rectangular (x, y) grid")
    xi = {v: i for i, v in enumerate(xs)}
    yi = {v: i for i, v in enumerate(ys)}
    rho = np.zeros((ny, nx))
    crazy = np.zeros((ny, nx), dtype=bool)
    for x, y, r, c in zip(columns["x"], columns["y"], columns["rho"], columns["crazy"]):
        rho[yi[y], xi[x]] = r
        crazy[yi[y], xi[x]] = bool(c)

    rgba = DENSITY_CMAP(np.clip(rho, 0.0, 1.0))
    rgba[crazy] = OVERFLOW_COLOR

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    extent = (min(xs) - 0.5, max(xs) + 0.5, min(ys), max(ys))
    ax.imshow(rgba, origin="lower", extent=extent, aspect="auto",
              interpolation="nearest")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    cfg = metadata.get("config", {})
    bits = []
    for key in ("alpha", "lam", "R"):
        if key in cfg:
            bits.append(f"{key}={cfg[key]}")
    ax.set_title("density " + " ".join(bits))
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
