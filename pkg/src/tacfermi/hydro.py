"""Closed-form hydrodynamic quantities of the double domain wall setup.

The control parameters are the particle-to-width ratio lambda = N/(2R) and
the second-neighbor amplitude alpha in [0, 1/8].  The two fluctuating
regions merge at lambda_c = 1 - 2 alpha.  Everything in this module is an
explicit formula or a one-dimensional bisection/quadrature, evaluated in
double precision (all downstream comparisons are at 1e-6 or looser).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import DomainError, NonConvergenceError

ALPHA_MAX = 0.125


class OutOfSupportError(DomainError):
    """Requested position lies in a frozen region."""


def u_of_lambda(lam: float, alpha: float) -> float:
    """Limiting recurrence coefficient u(lambda, alpha).

    Solves lam*u/(1-u^2) = u - 2*alpha*u*(1-3u^2) on [0, 1); vanishes
    identically for lam >= lambda_c = 1 - 2*alpha.
    """
    if lam <= 0:
        raise DomainError("lambda must be positive")
    if not 0 <= alpha <= ALPHA_MAX:
        raise DomainError("alpha must lie in [0, 1/8]")
    lam_c = 1 - 2 * alpha
    if lam >= lam_c:
        return 0.0
    # (1+4a)^2 - 24 a lam = (1-8a)^2 + 24 a (lam_c - lam); the conjugate
    # form below is cancellation-free for all alpha down to 0
    disc = (1 - 8 * alpha) ** 2 + 24 * alpha * (lam_c - lam)
    u2 = 2 * (lam_c - lam) / (math.sqrt(disc) + 1 - 8 * alpha)
    return math.sqrt(u2)


@dataclass(frozen=True)
class HydroParams:
    lam: float
    alpha: float
    lambda_c: float = field(init=False)
    u: float = field(init=False)
    k_c: float = field(init=False)

    def __post_init__(self):
        u = u_of_lambda(self.lam, self.alpha)
        object.__setattr__(self, "lambda_c", 1 - 2 * self.alpha)
        object.__setattr__(self, "u", u)
        # cos k_c = 2u^2 - 1, i.e. cos(k_c/2) = u
        object.__setattr__(self, "k_c", 2 * math.acos(min(1.0, u)))


def upsilon(k: float, h: HydroParams) -> float:
    """Edge function: -X = Upsilon(k) is the saddle-point curve at Y = 0.

    For lam >= lambda_c it is lam + cos k + 2 alpha cos 2k on [0, pi]; below
    the merger it is the square-root branch on [0, k_c], written in the
    cancellation-free half-angle form.
    """
    if k < -1e-15:
        raise DomainError("k must be nonnegative")
    k = max(k, 0.0)
    if h.lam >= h.lambda_c:
        if k > math.pi + 1e-12:
            raise DomainError(f"k={k} outside [0, pi]")
        return h.lam + math.cos(k) + 2 * h.alpha * math.cos(2 * k)
    if k > h.k_c + 1e-12:
        raise DomainError(f"k={k} outside [0, k_c={h.k_c}]")
    k = min(k, h.k_c)
    c = math.cos(k / 2)
    s = math.sin(k / 2)
    pref = 1 + 4 * h.alpha * (h.u * h.u - 2 * s * s)
    gap = (c - h.u) * (c + h.u)
    return pref * 2 * c * math.sqrt(max(gap, 0.0))


def upsilon_range(h: HydroParams):
    """(Upsilon at k=0, Upsilon at the far end of the valid k-range)."""
    top = upsilon(0.0, h)
    bottom = upsilon(math.pi, h) if h.lam >= h.lambda_c else 0.0
    return top, bottom


def upsilon_inverse(X: float, h: HydroParams, rel_tol: float = 1e-14) -> float:
    """The Fermi momentum k_F solving Upsilon(k_F) = X, X >= 0.

    Monotone bisection on the valid k-range (Upsilon decreases from k = 0);
    raises OutOfSupportError when X lies in a frozen region.
    """
    if X < 0:
        raise DomainError("X must be nonnegative")
    kmax = math.pi if h.lam >= h.lambda_c else h.k_c
    top = upsilon(0.0, h)
    bottom = upsilon(kmax, h)
    if X > top:
        raise OutOfSupportError(f"X={X} beyond the outer edge {top}")
    if X < bottom:
        raise OutOfSupportError(f"X={X} inside the full plateau edge {bottom}")
    if X == top:
        return 0.0
    if X == bottom:
        return kmax
    lo, hi = 0.0, kmax
    flo, fhi = top - X, bottom - X
    if not (flo >= 0 >= fhi):
        raise NonConvergenceError("bisection bracket lost monotonicity")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fmid = upsilon(mid, h) - X
        if fmid >= 0:
            if fmid > flo + 1e-12 * abs(flo):
                raise NonConvergenceError("Upsilon not decreasing on the bracket")
            lo, flo = mid, fmid
        else:
            hi, fhi = mid, fmid
        if hi - lo <= rel_tol * kmax:
            break
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class DensityProfile:
    X: tuple
    rho: tuple
    regions: tuple  # per-point annotation: frozen-empty | fluctuating | frozen-full


def density_profile(X_grid, h: HydroParams) -> DensityProfile:
    """rho(X, Y=0) = Upsilon^{-1}(|X|)/pi inside the fluctuating support,
    0 outside the outer edges, 1 on the central plateau above the merger.

    Points exactly on a support boundary take the fluctuating branch, so
    the profile is continuous.
    """
    top, bottom = upsilon_range(h)
    rho = []
    regions = []
    for X in X_grid:
        ax = abs(X)
        if ax > top:
            rho.append(0.0)
            regions.append("frozen-empty")
        elif h.lam > h.lambda_c and ax < bottom:
            rho.append(1.0)
            regions.append("frozen-full")
        else:
            rho.append(upsilon_inverse(ax, h) / math.pi)
            regions.append("fluctuating")
    return DensityProfile(X=tuple(X_grid), rho=tuple(rho), regions=tuple(regions))


def _neg_log_one_minus_u2(s: float, alpha: float) -> float:
    u = u_of_lambda(s, alpha)
    return -math.log1p(-u * u)


def _gl_float(n: int):
    import numpy as np

    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def free_energy(lam: float, alpha: float, rel_tol: float = 1e-10) -> float:
    """Bulk free energy f(lambda, alpha), vanishing identically above the
    merger, from the double antiderivative of -log(1 - u^2):

        f(lam) = int_lam^lam_c (s - lam) * (-log(1 - u^2(s))) ds.

    At alpha = 1/8 the integrand has a square-root factor at the upper end;
    the substitution s = lambda_c - v^2 restores analyticity there.
    """
    if lam <= 0:
        raise DomainError("lambda must be positive")
    if not 0 <= alpha <= ALPHA_MAX:
        raise DomainError("alpha must lie in [0, 1/8]")
    lam_c = 1 - 2 * alpha
    if lam >= lam_c:
        return 0.0

    quartic_merger = alpha > ALPHA_MAX - 1e-12

    def run(n):
        x, w = _gl_float(n)
        if quartic_merger:
            vmax = math.sqrt(lam_c - lam)
            vs = 0.5 * vmax * (x + 1)
            ws = w * 0.5 * vmax
            total = 0.0
            for v, wt in zip(vs, ws):
                s = lam_c - v * v
                total += wt * 2 * v * (s - lam) * _neg_log_one_minus_u2(s, alpha)
            return total
        mid = 0.5 * (lam + lam_c)
        half = 0.5 * (lam_c - lam)
        total = 0.0
        for xi, wt in zip(x, w):
            s = mid + half * xi
            total += wt * half * (s - lam) * _neg_log_one_minus_u2(s, alpha)
        return total

    a, b = run(96), run(192)
    if abs(a - b) > rel_tol * max(abs(b), 1e-300) + 1e-18:
        b2 = run(384)
        if abs(b - b2) > rel_tol * max(abs(b2), 1e-300) + 1e-18:
            raise NonConvergenceError("free-energy quadrature did not settle")
        b = b2
    return b


def edge_curvature(h: HydroParams):
    """(Upsilon(0), Upsilon''(0)) for the exterior-edge rescaling.

    Above the merger the second derivative is the exact -(1 + 8 alpha);
    below it comes from fourth-order central differences at two step sizes.
    """
    top = upsilon(0.0, h)
    if h.lam >= h.lambda_c:
        curv = -(1 + 8 * h.alpha)
    else:
        def second(step):
            # Upsilon is even in k: f''(0) = (16(f(h)-f(0)) - (f(2h)-f(0)))/(6h^2)
            f0 = upsilon(0.0, h)
            f1 = upsilon(step, h)
            f2 = upsilon(2 * step, h)
            return (16 * (f1 - f0) - (f2 - f0)) / (6 * step * step)

        a, b = second(1e-3), second(5e-4)
        if abs(a - b) > 1e-5 * max(1.0, abs(b)):
            raise NonConvergenceError("curvature estimates disagree")
        curv = b
    if abs(curv) < 1e-3:
        raise DomainError("degenerate edge curvature; parameters misused")
    if curv >= 0:
        raise DomainError("edge curvature must be negative")
    return top, curv
