"""Command-line surface: dataset generation and the verification suite.

Each subcommand emits one dataset as CSV (default) or JSON.  The CSV
carries a single '#'-prefixed header line holding the full configuration
echo as JSON, so a dataset can be regenerated byte-identically from its
own metadata.  Exit codes: 0 success, 2 configuration error, 3 numerical
failure, 4 verification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field

import mpmath as mp

from . import __version__, hydro
from .errors import TacfermiError
from .lattice import (
    EdgeScaling,
    ModelParams,
    density_map,
    edge_rescaled_correlator,
    quench_correlator,
    quench_density,
    _toeplitz_engine,
)
from .limitkernels import (
    AiryFamily,
    TacnodeParams,
    airy_kernel,
    kernel_table,
    tw_distribution,
)
from .numerics import PrecisionContext, lattice_bits
from .opuc import WeightSpec, szego_constant, toeplitz_det
from .verify import run_suites


class ConfigError(Exception):
    pass


@dataclass
class Dataset:
    columns: dict                 # name -> list of floats (or ints)
    metadata: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        names = list(self.columns)
        meta = json.dumps(self.metadata, sort_keys=True, separators=(",", ":"))
        lines = [f"# {meta}", ",".join(names)]
        nrows = len(next(iter(self.columns.values()))) if self.columns else 0
        for i in range(nrows):
            row = []
            for name in names:
                v = self.columns[name][i]
                if isinstance(v, bool):
                    row.append(str(int(v)))
                elif isinstance(v, int):
                    row.append(str(v))
                else:
                    row.append(format(float(v), ".17g"))
            lines.append(",".join(row))
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        payload = {
            "metadata": self.metadata,
            "columns": {k: [float(v) for v in vs] for k, vs in self.columns.items()},
        }
        return json.dumps(payload, sort_keys=True, indent=1) + "\n"


def mpf_hex(x) -> str:
    """Bit-exact textual form of an mpf: sign, hex mantissa, exponent."""
    sign, man, exp, _ = mp.mpf(x)._mpf_
    return f"{'-' if sign else '+'}0x{man:x}p{exp}"


def _parse_grid(spec: str, integer: bool = False):
    try:
        lo_s, hi_s, n_s = spec.split(":")
        lo, hi, n = float(lo_s), float(hi_s), int(n_s)
    except ValueError as exc:
        raise ConfigError(f"grid spec '{spec}' is not min:max:n") from exc
    if n <= 0:
        raise ConfigError("grid needs a positive point count")
    if n == 1:
        vals = [lo]
    else:
        step = (hi - lo) / (n - 1)
        vals = [lo + i * step for i in range(n)]
    if integer:
        return sorted(set(int(round(v)) for v in vals))
    return vals


def _parse_int_list(spec: str):
    try:
        return [int(tok) for tok in spec.split(",") if tok]
    except ValueError as exc:
        raise ConfigError(f"bad integer list '{spec}'") from exc


def _ctx(args) -> PrecisionContext:
    return PrecisionContext(bits=args.precision_bits, rel_tol=args.tol)


def _base_metadata(args, command: str) -> dict:
    skip = {"func", "out", "config"}
    echo = {k: v for k, v in sorted(vars(args).items())
            if k not in skip and v is not None and not callable(v)}
    return {"command": command, "config": echo, "version": __version__}


def _emit(ds: Dataset, args) -> None:
    text = ds.to_json() if args.format == "json" else ds.to_csv()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _density_row(task):
    p, xs, y, ctx, strict = task
    dm = density_map(p, xs, [y], ctx, strict=strict)
    return dm.rho[0], dm.crazy[0]


def _density_map_parallel(p, xs, ys, ctx, strict, workers: int):
    """Row-parallel density map; rows are independent once the shared
    propagator inverse exists, so it is built before forking."""
    if workers <= 1 or len(ys) <= 1:
        return density_map(p, xs, ys, ctx, strict=strict)
    import multiprocessing

    from .lattice import DensityMap

    _toeplitz_engine(p, ctx)  # shared read-only across forked workers
    mctx = multiprocessing.get_context("fork")
    tasks = [(p, tuple(xs), float(y), ctx, strict) for y in ys]
    with mctx.Pool(min(workers, len(ys))) as pool:
        rows = pool.map(_density_row, tasks)
    return DensityMap(xs=tuple(int(x) for x in xs),
                      ys=tuple(float(y) for y in ys),
                      rho=[r[0] for r in rows], crazy=[r[1] for r in rows])


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_density_profile(args) -> Dataset:
    if args.lam is None or args.alpha is None:
        raise ConfigError("density-profile needs --alpha and --lambda")
    h = hydro.HydroParams(args.lam, args.alpha)
    if args.lattice:
        if args.R is None:
            raise ConfigError("--lattice needs --R")
        R = args.R
        ctx = _ctx(args)
        if ctx.bits < lattice_bits(R):
            ctx = ctx.with_bits(lattice_bits(R))
        L = int(round(args.lam * R - 0.5))
        p = ModelParams(alpha=args.alpha, R=R, L=L)
        lo, hi, _ = args.grid.split(":")
        xs = [x for x in range(int(float(lo) * R), int(float(hi) * R) + 1)]
        dm = density_map(p, xs, [0.0], ctx)
        X = [x / R for x in xs]
        rho_lat = dm.rho[0]
        prof = hydro.density_profile(X, h)
        diff = [abs(a - b) for a, b in zip(prof.rho, rho_lat)]
        cols = {"X": X, "rho_analytic": list(prof.rho),
                "rho_lattice": rho_lat, "abs_diff": diff}
        meta = _base_metadata(args, "density-profile")
        meta["lattice"] = {"N": p.N, "L": p.L, "lambda_effective": p.lam,
                           "bits": ctx.bits}
        return Dataset(columns=cols, metadata=meta)
    X = _parse_grid(args.grid)
    if not X:
        raise ConfigError("empty X grid")
    prof = hydro.density_profile(X, h)
    cols = {"X": list(X), "rho_analytic": list(prof.rho)}
    return Dataset(columns=cols, metadata=_base_metadata(args, "density-profile"))


def cmd_density_map(args) -> Dataset:
    if args.alpha is None or args.lam is None or args.R is None:
        raise ConfigError("density-map needs --alpha, --lambda, --R")
    R = args.R
    ctx = _ctx(args)
    if ctx.bits < lattice_bits(R) and not args.force_bits:
        ctx = ctx.with_bits(lattice_bits(R))
    L = int(round(args.lam * R - 0.5))
    p = ModelParams(alpha=args.alpha, R=R, L=L)
    xs = _parse_grid(args.xgrid, integer=True)
    ys = _parse_grid(args.ygrid)
    if any(abs(y) > R for y in ys):
        raise ConfigError("ygrid must lie within [-R, R]")
    dm = _density_map_parallel(p, xs, ys, ctx, strict=not args.force_bits,
                               workers=args.threads)
    col_x, col_y, col_rho, col_crazy = [], [], [], []
    for iy, y in enumerate(dm.ys):
        for ix, x in enumerate(dm.xs):
            col_x.append(x)
            col_y.append(y)
            col_rho.append(dm.rho[iy][ix])
            col_crazy.append(dm.crazy[iy][ix])
    cols = {"x": col_x, "y": col_y, "rho": col_rho, "crazy": col_crazy}
    meta = _base_metadata(args, "density-map")
    meta["lattice"] = {"N": p.N, "L": p.L, "lambda_effective": p.lam,
                       "bits": ctx.bits}
    return Dataset(columns=cols, metadata=meta)


def cmd_kernel(args) -> Dataset:
    ctx = _ctx(args)
    s_grid = _parse_grid(args.grid)
    sigma = args.sigma
    meta = _base_metadata(args, "kernel")
    if args.kind in ("airy", "higher-airy"):
        m = 1 if args.kind == "airy" else 2
        fam = AiryFamily(m=m, sigma=sigma)
        vals = [float(airy_kernel(s, s, fam, ctx)) for s in s_grid]
        return Dataset(columns={"s": list(s_grid), "kernel": vals}, metadata=meta)
    m = 1 if args.kind == "tacnode" else 2
    params = TacnodeParams(m=m, sigma=sigma)
    table, tmeta = kernel_table(params, s_grid, ctx, n=args.nodes)
    cols = {"s": list(s_grid),
            "kernel": [float(table[i][i]) for i in range(len(s_grid))]}
    if args.compare_two_airy:
        fam = AiryFamily(m=m, sigma=0.0)
        two = [float(airy_kernel(sigma - s, sigma - s, fam, ctx)
                     + airy_kernel(sigma + s, sigma + s, fam, ctx))
               for s in s_grid]
        cols["two_airy"] = two
        cols["abs_diff"] = [abs(a - b) for a, b in zip(cols["kernel"], two)]
    meta["kernel"] = tmeta
    return Dataset(columns=cols, metadata=meta)


def cmd_partition(args) -> Dataset:
    ctx = _ctx(args)
    meta = _base_metadata(args, "partition")
    if args.n_scan:
        if args.R is None or args.alpha is None:
            raise ConfigError("--n-scan needs --R and --alpha")
        R = args.R
        bits = max(ctx.bits, lattice_bits(R))
        ctx = ctx.with_bits(bits)
        lo, hi, step = (int(t) for t in args.n_scan.split(":"))
        Ns = list(range(lo, hi + 1, step))
        w = WeightSpec(R=R, alpha=args.alpha)
        const = szego_constant(w, ctx)
        alpha = args.alpha
        if abs(alpha - 0.125) < 1e-12:
            scale = (R / 4) ** 0.2
            center = 3 * R / 2
            m = 2
        else:
            scale = ((1 - 8 * alpha) * R) ** (1 / 3)
            center = 2 * R * (1 - 2 * alpha)
            m = 1
        cols = {"N": [], "sigma": [], "z_tilde": [], "tw_limit": [], "abs_diff": []}
        hexes = {}
        for N in Ns:
            z = toeplitz_det(N, w, ctx) / const
            sigma = (N - center) / scale
            f = tw_distribution(sigma, m, ctx.with_bits(192), n=args.nodes)
            cols["N"].append(N)
            cols["sigma"].append(sigma)
            cols["z_tilde"].append(float(z))
            cols["tw_limit"].append(float(f))
            cols["abs_diff"].append(abs(float(z) - float(f)))
            hexes[str(N)] = mpf_hex(z)
        meta["z_tilde_hex"] = hexes
        meta["bits"] = ctx.bits
        return Dataset(columns=cols, metadata=meta)
    if args.lambda_scan:
        if args.R is None or args.alpha is None:
            raise ConfigError("--lambda-scan needs --R and --alpha")
        R = args.R
        bits = max(ctx.bits, lattice_bits(R))
        ctx = ctx.with_bits(bits)
        lams = _parse_grid(args.lambda_scan)
        w = WeightSpec(R=R, alpha=args.alpha)
        const = szego_constant(w, ctx)
        cols = {"lambda": [], "N": [], "f_hydro": [], "f_lattice": [], "abs_diff": []}
        for lam in lams:
            N = max(1, int(round(2 * lam * R)))
            if N % 2 == 0:
                N += 1
            z = toeplitz_det(N, w, ctx) / const
            f_lat = float(-mp.log(z) / (4 * mp.mpf(R) ** 2))
            lam_eff = N / (2 * R)
            f_h = hydro.free_energy(lam_eff, args.alpha)
            cols["lambda"].append(lam_eff)
            cols["N"].append(N)
            cols["f_hydro"].append(f_h)
            cols["f_lattice"].append(f_lat)
            cols["abs_diff"].append(abs(f_h - f_lat))
        meta["bits"] = ctx.bits
        return Dataset(columns=cols, metadata=meta)
    raise ConfigError("partition needs --n-scan or --lambda-scan")


def cmd_converge(args) -> Dataset:
    ctx = _ctx(args)
    if args.alpha is None:
        raise ConfigError("converge needs --alpha")
    Ls = _parse_int_list(args.L_list)
    if not Ls:
        raise ConfigError("empty L list")
    kind = args.kind
    sigma = args.sigma
    cols = {"L": [], "sigma_eff": [], "value": []}
    meta = _base_metadata(args, "converge")
    exponent = 0.2 if kind == "higher-tacnode" else 1 / 3
    for L in Ls:
        if kind == "exterior-airy":
            if args.lam is None:
                raise ConfigError("exterior-airy needs --lambda")
            R = L / args.lam
            p = ModelParams(alpha=args.alpha, R=R, L=L)
            sc = EdgeScaling(kind=kind, sigma=sigma, s_grid=(0.0,))
        else:
            lam_c = 1 - 2 * args.alpha
            if kind == "higher-tacnode":
                R = L / 0.75 if sigma == 0 else _solve_r(L, sigma, args.alpha)
            else:
                R = L / lam_c if sigma == 0 else _solve_r(L, sigma, args.alpha)
            p = ModelParams(alpha=args.alpha, R=R, L=L)
            sc = EdgeScaling(kind=kind, sigma=sigma, s_grid=(0.0,))
        res = edge_rescaled_correlator(p, sc, ctx)
        cols["L"].append(L)
        cols["sigma_eff"].append(res.sigma_effective)
        cols["value"].append(float(res.values[0][0]))
    xs = [L ** (-exponent) for L in cols["L"]]
    n = len(xs)
    if n >= 2:
        xbar = sum(xs) / n
        ybar = sum(cols["value"]) / n
        num = sum((x - xbar) * (y - ybar) for x, y in zip(xs, cols["value"]))
        den = sum((x - xbar) ** 2 for x in xs)
        slope = num / den
        meta["fit"] = {"slope": slope, "intercept": ybar - slope * xbar,
                       "abscissa": f"L^-{exponent:.6g}"}
    meta["scale_exponent"] = exponent
    return Dataset(columns=cols, metadata=meta)


def _solve_r(L: int, sigma: float, alpha: float) -> float:
    """R with L = R(1-2a) + sigma Rt^e (fixed point, few iterations)."""
    lam_c = 1 - 2 * alpha
    higher = abs(alpha - 0.125) < 1e-12
    R = L / (0.75 if higher else lam_c)
    for _ in range(60):
        if higher:
            R = (L - sigma * (R / 8) ** 0.2) / 0.75
        else:
            R = (L - sigma * ((1 - 8 * alpha) * R / 2) ** (1 / 3)) / lam_c
    return R


def cmd_quench(args) -> Dataset:
    ctx = _ctx(args)
    if args.t is None or args.L is None:
        raise ConfigError("quench needs --t and --L")
    t, L = args.t, int(args.L)
    meta = _base_metadata(args, "quench")
    if args.center_edge:
        scale = (t / 2) ** (1 / 3)
        s_grid = _parse_grid(args.grid)
        cols = {"s": [], "value": [], "two_airy": [], "abs_diff": []}
        for s in s_grid:
            x = int(round(s * scale))
            s_eff = x / scale
            got = float(scale * quench_correlator(x, x, t, L, ctx))
            se = mp.mpf(s_eff)
            kai_p = float(mp.airyai(se, derivative=1) ** 2 - se * mp.airyai(se) ** 2)
            kai_m = float(mp.airyai(-se, derivative=1) ** 2 + se * mp.airyai(-se) ** 2)
            cols["s"].append(s_eff)
            cols["value"].append(got)
            cols["two_airy"].append(kai_p + kai_m)
            cols["abs_diff"].append(abs(got - (kai_p + kai_m)))
        return Dataset(columns=cols, metadata=meta)
    xs = _parse_grid(args.grid, integer=True)
    cols = {"x": [], "rho": [], "rho_hydro": [], "abs_diff": []}
    for x in xs:
        rho = float(quench_density(x, t, L, ctx))
        ratio = abs(x) / t
        if ratio <= L / t - 1:
            rho_h = 1.0
        elif ratio >= L / t + 1:
            rho_h = 0.0
        else:
            rho_h = float(mp.acos(ratio - 1) / mp.pi) if ratio <= 2 else 0.0
        cols["x"].append(x)
        cols["rho"].append(rho)
        cols["rho_hydro"].append(rho_h)
        cols["abs_diff"].append(abs(rho - rho_h))
    return Dataset(columns=cols, metadata=meta)


def cmd_verify(args) -> int:
    names = args.suite or None
    try:
        results = run_suites(names, bits=args.precision_bits)
    except KeyError as exc:
        raise ConfigError(str(exc)) from exc
    for r in results:
        print(r.line())
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return 4 if failed else 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _build_parser():
    ap = argparse.ArgumentParser(
        prog="tacfermi",
        description="Correlators, limit shapes, and edge kernels of the "
                    "double-domain-wall free-fermion chain.",
    )
    ap.add_argument("--config", help="JSON file of defaults; flags override")
    sub = ap.add_subparsers(dest="command", required=True)
    children = []

    def common(p):
        p.add_argument("--alpha", type=float)
        p.add_argument("--lambda", dest="lam", type=float)
        p.add_argument("--R", type=float)
        p.add_argument("--L", type=int)
        p.add_argument("--sigma", type=float, default=0.0)
        p.add_argument("--order", type=int, default=1)
        p.add_argument("--precision-bits", type=int, default=256)
        p.add_argument("--force-bits", action="store_true",
                       help="pin the bit count instead of auto-raising it to "
                            "the 8R rule (residual checks still guard results)")
        p.add_argument("--tol", type=float, default=1e-8)
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--nodes", type=int, default=48)
        p.add_argument("--out", help="output path (default stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("density-profile", help="analytic (and lattice) rho(X)")
    children.append(p)
    common(p)
    p.add_argument("--grid", default="-3:3:241")
    p.add_argument("--lattice", action="store_true")
    p.set_defaults(func=cmd_density_profile)

    p = sub.add_parser("density-map", help="rho(x, y) field with crazy flags")
    children.append(p)
    common(p)
    p.add_argument("--xgrid", required=True)
    p.add_argument("--ygrid", required=True)
    p.set_defaults(func=cmd_density_map)

    p = sub.add_parser("kernel", help="limiting kernel diagonals")
    children.append(p)
    common(p)
    p.add_argument("--kind", required=True,
                   choices=("airy", "higher-airy", "tacnode", "higher-tacnode"))
    p.add_argument("--grid", default="-4:4:33")
    p.add_argument("--compare-two-airy", action="store_true")
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("partition", help="Z_N, scaled determinant, free energy")
    children.append(p)
    common(p)
    p.add_argument("--n-scan", help="lo:hi:step over N")
    p.add_argument("--lambda-scan", help="min:max:n over lambda")
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser("converge", help="edge value versus L with linear fit")
    children.append(p)
    common(p)
    p.add_argument("--kind", required=True,
                   choices=("exterior-airy", "tacnode", "higher-tacnode"))
    p.add_argument("--L-list", required=True, help="comma-separated L values")
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("quench", help="real-time release profiles")
    children.append(p)
    common(p)
    p.add_argument("--t", type=float)
    p.add_argument("--grid", default="-200:200:81")
    p.add_argument("--center-edge", action="store_true")
    p.set_defaults(func=cmd_quench)

    p = sub.add_parser("verify", help="run invariant suites")
    children.append(p)
    common(p)
    p.add_argument("--suite", action="append",
                   help="suite name (repeatable); default all")
    p.set_defaults(func=cmd_verify, verify=True)
    return ap, children


def main(argv=None) -> int:
    ap, children = _build_parser()
    # config file provides defaults; explicit flags override (subparsers
    # re-apply their own defaults, so they get the overrides too)
    pre, _ = ap.parse_known_args(argv)
    if getattr(pre, "config", None):
        try:
            with open(pre.config) as fh:
                defaults = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return 2
        ap.set_defaults(**defaults)
        for child in children:
            child.set_defaults(**defaults)
    args = ap.parse_args(argv)
    try:
        if getattr(args, "verify", False):
            return cmd_verify(args)
        ds = args.func(args)
        _emit(ds, args)
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except TacfermiError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
