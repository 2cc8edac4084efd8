"""Special-function substrate: deformed Bessel functions, weight moments,
and (higher) Airy functions.

The deformed Bessel function of order n, argument t and deformation a is

    J_n^(a)(t) = (1/2pi) int_{-pi}^{pi} e^{-ikn} e^{it(sin k - a sin 2k)} dk,

real for real inputs.  Families over many orders are evaluated in one shot:
the trapezoid sum on a uniform grid is a DFT of the phase samples, so a
single power-of-two FFT yields every order at once.

The higher Airy function of order q = 2m+1 is

    Ai_q(s) = (1/2pi) int_R cos(ks + k^q / q) dk,

evaluated on the ray k = e^{i pi/(2q)} u where the phase k^q/q becomes a
pure decay e^{-u^q/q}.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath as mp

from .errors import DomainError, NonConvergenceError
from .numerics import (
    DEFAULT_CTX,
    PrecisionContext,
    fft_pow2,
    gauss_legendre,
    pow2_at_least,
)

ALPHA_MAX = 0.125


def dispersion(k, alpha):
    """Single-particle energy cos k + alpha cos 2k."""
    return mp.cos(k) + alpha * mp.cos(2 * k)


@dataclass(frozen=True)
class DeformedBesselParams:
    n: int
    t: float
    alpha: float

    def __post_init__(self):
        if abs(self.alpha) > ALPHA_MAX:
            raise DomainError(f"|alpha| must be <= 1/8, got {self.alpha}")


@dataclass(frozen=True)
class HigherAiryOrder:
    m: int

    def __post_init__(self):
        if self.m < 1:
            raise DomainError("m must be a positive integer")

    @property
    def order(self) -> int:
        return 2 * self.m + 1


def oscillation_nodes(t, n) -> int:
    """Node-count rule for the deformed Bessel integrand: at least eight
    nodes per oscillation of e^{i(t sin k - kn)}."""
    return max(2048, 8 * int(mp.ceil(abs(mp.mpf(t)) + abs(n))))


# ---------------------------------------------------------------------------
# Batched families via FFT
# ---------------------------------------------------------------------------

class _FourierTable:
    """All Fourier coefficients (1/2pi) int e^{-ikn} f(k) dk of a sampled
    2pi-periodic integrand, indexed modulo the grid size."""

    def __init__(self, values, grid_size: int, max_order: int):
        self.values = values
        self.grid_size = grid_size
        self.max_order = max_order

    def __getitem__(self, n: int):
        if abs(n) > self.max_order:
            raise DomainError(
                f"order {n} outside the table range +-{self.max_order}"
            )
        return self.values[n % self.grid_size]


_bessel_cache: dict = {}
_moment_cache: dict = {}


def _build_bessel_table(t, alpha, max_order: int, ctx: PrecisionContext):
    t = mp.mpf(t)
    alpha = mp.mpf(alpha)
    M = pow2_at_least(oscillation_nodes(t * (1 + 2 * abs(alpha)), max_order + 64))
    with ctx.workprec():
        samples = [mp.mpc(0)] * M
        two_pi = 2 * mp.pi
        half = M // 2
        for j in range(half + 1):
            k = two_pi * j / M
            z = mp.expj(t * (mp.sin(k) - alpha * mp.sin(2 * k)))
            samples[j] = z
            if 0 < j < half or (j == half and M % 2 == 0):
                samples[(M - j) % M] = mp.conj(z)
        out = fft_pow2(samples)
        values = [v.real / M for v in out]
    return _FourierTable(values, M, (M - 64) // 2)


def deformed_bessel_table(t, alpha, max_order: int,
                          ctx: PrecisionContext = DEFAULT_CTX) -> _FourierTable:
    """Table of J_n^(alpha)(t) for |n| <= max_order, cached per (t, alpha, bits)."""
    key = (mp.mpf(t), mp.mpf(alpha), ctx.bits)
    table = _bessel_cache.get(key)
    if table is None or table.max_order < max_order:
        table = _build_bessel_table(t, alpha, max_order, ctx)
        _bessel_cache[key] = table
    return table


def deformed_bessel(p: DeformedBesselParams,
                    ctx: PrecisionContext = DEFAULT_CTX):
    """J_n^(alpha)(t); node count follows oscillation_nodes."""
    return deformed_bessel_table(p.t, p.alpha, abs(p.n), ctx)[p.n]


def _build_moment_table(tau, alpha, max_order: int, ctx: PrecisionContext):
    tau = mp.mpf(tau)
    alpha = mp.mpf(alpha)
    M = pow2_at_least(max(
        2048, 8 * (int(mp.ceil(abs(tau) * (1 + 2 * abs(alpha)))) + max_order + 64)
    ))
    with ctx.workprec():
        samples = [mp.mpc(0)] * M
        two_pi = 2 * mp.pi
        half = M // 2
        for j in range(half + 1):
            k = two_pi * j / M
            v = mp.exp(tau * dispersion(k, alpha))
            samples[j] = mp.mpc(v)
            if 0 < j:
                samples[(M - j) % M] = mp.mpc(v)
        out = fft_pow2(samples)
        values = [v.real / M for v in out]
    return _FourierTable(values, M, (M - 64) // 2)


def moment_table(tau, alpha, max_order: int,
                 ctx: PrecisionContext = DEFAULT_CTX) -> _FourierTable:
    """Fourier coefficients of e^{tau eps(k)}: entries of the propagator
    Toeplitz matrices.  Cached per (tau, alpha, bits)."""
    key = (mp.mpf(tau), mp.mpf(alpha), ctx.bits)
    table = _moment_cache.get(key)
    if table is None or table.max_order < max_order:
        table = _build_moment_table(tau, alpha, max_order, ctx)
        _moment_cache[key] = table
    return table


def weight_moment(n: int, R, alpha, ctx: PrecisionContext = DEFAULT_CTX):
    """(1/2pi) int e^{-ikn} e^{2R eps(k)} dk; even in n."""
    if not mp.mpf(R) > 0:
        raise DomainError("R must be positive")
    return moment_table(2 * mp.mpf(R), alpha, abs(n), ctx)[n]


def clear_caches():
    _bessel_cache.clear()
    _moment_cache.clear()
    _ray_rule_cache.clear()


# ---------------------------------------------------------------------------
# Higher Airy functions on the rotated ray
# ---------------------------------------------------------------------------

_ray_rule_cache: dict = {}


def _ray_extent(q: int, smin, prec: int):
    """Upper limit U with e^{-U^q/q + |smin| U sin(theta)} below 2^-(prec+30)."""
    target = (prec + 30) * mp.log(2)
    growth = max(mp.mpf(0), -mp.mpf(smin)) * mp.sin(mp.pi / (2 * q))
    U = (q * target) ** (mp.mpf(1) / q) + 1
    for _ in range(4):
        U = (q * (target + growth * U)) ** (mp.mpf(1) / q) + 1
    return mp.ceil(U)


def _ray_nodes(q: int, lo, hi, U, bits: int) -> int:
    """Node count resolving e^{i x u cos(theta)} along the ray.

    Negative arguments oscillate over the whole decay window; positive ones
    are damped by e^{-x u sin(theta)}, which caps their oscillation count
    at ~bits/tan(theta) regardless of size.
    """
    neg = max(0.0, -float(lo))
    theta = float(mp.pi) / (2 * q)
    import math

    pos_osc = 0.25 * bits / math.tan(theta)
    n = max(64, int(float(U) * (4 + 2 * neg) + pos_osc))
    # quantize so repeat calls share cached Gauss-Legendre rules
    return ((n + 63) // 64) * 64


def _higher_airy_on_rule(s, q: int, rule):
    theta = mp.pi / (2 * q)
    rot = mp.expj(theta)
    acc = mp.mpc(0)
    for u, w in zip(rule.nodes, rule.weights):
        acc += w * mp.expj(s * rot * u) * mp.exp(-(u ** q) / q)
    return (rot * acc).real / mp.pi


def higher_airy(s, order: HigherAiryOrder | int,
                ctx: PrecisionContext = DEFAULT_CTX):
    """Ai of order 2m+1 at s, by ray quadrature with resolution doubling."""
    m = order.m if isinstance(order, HigherAiryOrder) else int(order)
    if m < 1:
        raise DomainError("order m must be >= 1")
    q = 2 * m + 1
    s = mp.mpf(s)
    with ctx.workprec():
        U = _ray_extent(q, min(s, mp.mpf(0)), ctx.bits)
        n = _ray_nodes(q, s, s, U, ctx.bits)
        prev = _higher_airy_on_rule(s, q, gauss_legendre(n, 0, U, ctx))
        for _ in range(6):
            n *= 2
            cur = _higher_airy_on_rule(s, q, gauss_legendre(n, 0, U, ctx))
            if abs(cur - prev) <= ctx.rel_tol * max(abs(cur), mp.ldexp(1, -ctx.bits // 2)):
                return cur
            prev = cur
    raise NonConvergenceError(f"ray quadrature for Ai_{q}({s}) did not settle")


def airy_sum_matrix(q: int, avec, bvec, ctx: PrecisionContext = DEFAULT_CTX,
                    validate: bool = True):
    """Matrix Ai_q(a_i + b_j) for vectors of reals, via one shared ray rule.

    The ray integrand factorizes over a and b, so the matrix is a single
    complex outer product: far cheaper than len(a)*len(b) scalar calls.
    A handful of probe entries are validated against a doubled rule.
    """
    avec = [mp.mpf(a) for a in avec]
    bvec = [mp.mpf(b) for b in bvec]
    if not avec or not bvec:
        return []
    with ctx.workprec():
        lo = min(avec) + min(bvec)
        hi = max(avec) + max(bvec)
        U = _ray_extent(q, min(lo, mp.mpf(0)), ctx.bits)
        n = _ray_nodes(q, lo, hi, U, ctx.bits)
        rule = gauss_legendre(n, 0, U, ctx)
        theta = mp.pi / (2 * q)
        rot = mp.expj(theta)
        ray = [rot * u for u in rule.nodes]
        decay = [w * mp.exp(-(u ** q) / q) for u, w in zip(rule.nodes, rule.weights)]
        E = [[mp.expj(a * r) for r in ray] for a in avec]
        F = [[d * mp.expj(b * r) for d, r in zip(decay, ray)] for b in bvec]
        out = []
        inv_pi = 1 / mp.pi
        for row in E:
            out.append([(rot * mp.fdot(row, col)).real * inv_pi for col in F])
        if validate:
            rule2 = gauss_legendre(2 * n, 0, U, ctx)
            probes = {(0, 0), (0, len(bvec) - 1), (len(avec) - 1, 0),
                      (len(avec) - 1, len(bvec) - 1),
                      (len(avec) // 2, len(bvec) // 2)}
            floor = mp.ldexp(1, -ctx.bits // 2)
            for i, j in probes:
                ref = _higher_airy_on_rule(avec[i] + bvec[j], q, rule2)
                if abs(out[i][j] - ref) > ctx.rel_tol * max(abs(ref), floor):
                    raise NonConvergenceError(
                        f"ray rule failed validation at Ai_{q}({avec[i] + bvec[j]})"
                    )
        return out


def airy_scaling_check(t, s, alpha, ctx: PrecisionContext = DEFAULT_CTX):
    """Rescaled deformed Bessel against its limiting (higher) Airy value.

    For alpha < 1/8 the index scale is cubic-root; exactly at alpha = 1/8
    the cubic term of the phase vanishes and the scale is the fifth root.
    Non-integer indices are floored and the limit side is evaluated at the
    effective (post-floor) argument, which is also returned.
    """
    t = mp.mpf(t)
    alpha = mp.mpf(alpha)
    s = mp.mpf(s)
    if not (0 <= alpha <= ALPHA_MAX):
        raise DomainError("alpha must lie in [0, 1/8]")
    with ctx.workprec():
        if alpha < ALPHA_MAX:
            scale = (t * (1 - 8 * alpha) / 2) ** (mp.mpf(1) / 3)
            center = t * (1 - 2 * alpha)
            m = 1
        else:
            scale = (t / 8) ** (mp.mpf(1) / 5)
            center = 3 * t / 4
            m = 2
        n = int(mp.floor(center + s * scale))
        s_eff = (n - center) / scale
        lattice_side = scale * deformed_bessel(
            DeformedBesselParams(n=n, t=float(t), alpha=float(alpha)), ctx
        )
        limit_side = higher_airy(s_eff, m, ctx)
    return lattice_side, limit_side, s_eff
