"""Desk-scale invariant suites behind the `verify` CLI command.

Each suite runs a handful of identities at small parameters and returns
CheckResult rows; the CLI turns them into a machine-readable report.
Numerical failures (precision, singular solves) propagate as exceptions —
they are a different failure mode than an out-of-tolerance identity.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath as mp

from . import hydro
from .lattice import (
    ModelParams,
    correlator_contour,
    correlator_fredholm,
    correlator_opuc,
    correlator_toeplitz,
    default_window,
    particle_number,
)
from .limitkernels import (
    AiryFamily,
    TacnodeParams,
    airy_kernel,
    airy_kernel_cd,
    tacnode_kernel,
    tw_distribution,
)
from .numerics import KernelGrid, PrecisionContext, fredholm_det, gauss_legendre
from .opuc import WeightSpec, gcbo_check, toeplitz_det, verblunsky
from .special import DeformedBesselParams, deformed_bessel, weight_moment


@dataclass
class CheckResult:
    suite: str
    name: str
    passed: bool
    measured: float
    threshold: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"{status} {self.suite}.{self.name}: "
                f"measured {self.measured:.3e} vs threshold {self.threshold:.3e}")


def _check(suite, name, measured, threshold) -> CheckResult:
    measured = float(measured)
    return CheckResult(suite=suite, name=name, passed=measured <= threshold,
                       measured=measured, threshold=threshold)


def suite_numerics(bits: int):
    ctx = PrecisionContext(bits=bits)
    out = []
    val = fredholm_det(lambda x, y: mp.exp(-x - y), (0, 40), 16, ctx)
    want = 1 - (1 - mp.exp(-80)) / 2
    out.append(_check("numerics", "rank_one_det", abs(val - want), 1e-9))
    rule = gauss_legendre(6, 0, 1, ctx)
    out.append(_check("numerics", "gl_degree11",
                      abs(rule.integrate(lambda x: x ** 11) - mp.mpf(1) / 12), 1e-20))
    grid = KernelGrid.from_kernel(lambda x, y: mp.mpf(0),
                                  gauss_legendre(8, 0, 1, ctx))
    out.append(_check("numerics", "kernelgrid_trace", abs(grid.trace()), 1e-30))
    return out


def suite_special(bits: int):
    ctx = PrecisionContext(bits=bits)
    out = []
    v = deformed_bessel(DeformedBesselParams(1, 2.0, 0.0), ctx)
    out.append(_check("special", "bessel_j1",
                      abs(v - mp.besselj(1, 2)), 1e-20))
    a = deformed_bessel(DeformedBesselParams(-3, 5.0, 1 / 16), ctx)
    b = deformed_bessel(DeformedBesselParams(3, 5.0, -1 / 16), ctx)
    out.append(_check("special", "reflection", abs(a + b), 1e-20))
    total = mp.fsum(deformed_bessel(DeformedBesselParams(n, 4.0, 1 / 8), ctx) ** 2
                    for n in range(-30, 31))
    out.append(_check("special", "parseval", abs(total - 1), 1e-10))
    out.append(_check("special", "moment_i0",
                      abs(weight_moment(0, 1.0, 0.0, ctx) - mp.besseli(0, 2)), 1e-20))
    return out


def suite_opuc(bits: int):
    ctx = PrecisionContext(bits=bits)
    out = []
    w = WeightSpec(R=2.0, alpha=1 / 16)
    seq = verblunsky(18, w, ctx)
    out.append(_check("opuc", "dpii_residual",
                      max(abs(r) for r in seq.residuals), 1e-10))
    Z = [toeplitz_det(n, w, ctx) for n in range(18)]
    worst = max(abs(Z[N + 1] * Z[N - 1] / Z[N] ** 2 - (1 - seq.u[N] ** 2))
                for N in range(1, 16))
    out.append(_check("opuc", "z_recursion", worst, 1e-12))
    out.append(_check("opuc", "gcbo",
                      gcbo_check(4, WeightSpec(R=1.0, alpha=0.0), 40, ctx), 1e-10))
    return out


def suite_lattice(bits: int):
    ctx = PrecisionContext(bits=bits)
    out = []
    p = ModelParams(alpha=1 / 16, R=2.0, L=1)
    window = tuple(range(-6, 7))
    # strict=False so a too-small bit count reaches the inverse residual
    # check and fails there (numerical failure, not a FAIL row)
    c1 = correlator_toeplitz(p, 0.0, window, ctx, strict=False)
    c2 = correlator_opuc(p, window, ctx)
    c3 = correlator_contour(p, window, ctx)
    c4 = correlator_fredholm(p, window, ctx)
    scale = max(abs(v) for row in c1.values for v in row)

    def rel(a, b):
        worst = mp.mpf(0)
        for ra, rb in zip(a.values, b.values):
            for va, vb in zip(ra, rb):
                m_ = max(abs(va), abs(vb))
                if m_ > scale * mp.mpf(1e-30):
                    worst = max(worst, abs(va - vb) / m_)
        return worst

    out.append(_check("lattice", "toeplitz_vs_opuc", rel(c1, c2), 1e-18))
    out.append(_check("lattice", "toeplitz_vs_contour", rel(c1, c3), 1e-18))
    out.append(_check("lattice", "toeplitz_vs_fredholm", rel(c1, c4), 1e-18))
    cm = correlator_toeplitz(p, 0.0, default_window(p), ctx, strict=False)
    out.append(_check("lattice", "particle_number",
                      abs(particle_number(cm) - p.N), 1e-10))
    t_def, m_def = cm.symmetry_defects()
    out.append(_check("lattice", "transpose_symmetry", t_def, 1e-14))
    out.append(_check("lattice", "mirror_symmetry", m_def, 1e-14))
    return out


def suite_hydro(bits: int):
    out = []
    u = hydro.u_of_lambda(0.5, 1 / 16)
    resid = abs(0.5 * u / (1 - u * u) - (u - 2 / 16 * u * (1 - 3 * u * u)))
    out.append(_check("hydro", "fixed_point", resid, 1e-12))
    h = hydro.HydroParams(0.8, 1 / 16)
    k = 0.4
    out.append(_check("hydro", "upsilon_round_trip",
                      abs(hydro.upsilon_inverse(hydro.upsilon(k, h), h) - k), 1e-10))
    lam_c = 1 - 2 / 16
    d2 = (hydro.free_energy(0.5 + 1e-4, 1 / 16)
          - 2 * hydro.free_energy(0.5, 1 / 16)
          + hydro.free_energy(0.5 - 1e-4, 1 / 16)) / 1e-8
    u05 = hydro.u_of_lambda(0.5, 1 / 16)
    out.append(_check("hydro", "free_energy_curvature",
                      abs(d2 + mp.log1p(-u05 * u05)), 1e-6))
    out.append(_check("hydro", "vanishes_above_merger",
                      abs(hydro.free_energy(lam_c + 0.1, 1 / 16)), 1e-300))
    return out


def suite_limitkernels(bits: int):
    ctx = PrecisionContext(bits=max(128, bits // 2))
    out = []
    v = airy_kernel(0.2, -0.4, AiryFamily(m=1, sigma=0.0), ctx, n=48)
    out.append(_check("limitkernels", "airy_cd_match",
                      abs(v - airy_kernel_cd(0.2, -0.4)), 1e-8))
    f0 = tw_distribution(0.0, 1, ctx, n=32)
    f2 = tw_distribution(2.0, 1, ctx, n=32)
    out.append(_check("limitkernels", "tw_monotone",
                      0.0 if f0 < f2 <= 1 + 1e-12 else 1.0, 0.5))
    p = TacnodeParams(m=1, sigma=0.0)
    a = tacnode_kernel(0.4, -0.9, p, ctx, n=24, cutoff=12.0)
    b = tacnode_kernel(-0.4, 0.9, p, ctx, n=24, cutoff=12.0)
    out.append(_check("limitkernels", "tacnode_mirror", abs(a - b), 1e-8))
    return out


SUITES = {
    "numerics": suite_numerics,
    "special": suite_special,
    "opuc": suite_opuc,
    "lattice": suite_lattice,
    "hydro": suite_hydro,
    "limitkernels": suite_limitkernels,
}


def run_suites(names=None, bits: int = 512):
    names = list(names) if names else list(SUITES)
    results = []
    for name in names:
        if name not in SUITES:
            raise KeyError(f"unknown suite '{name}'; choose from {sorted(SUITES)}")
        with mp.workprec(bits + 32):
            results.extend(SUITES[name](bits))
    return results
