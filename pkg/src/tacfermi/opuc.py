"""Orthonormal polynomials on the unit circle for the weight e^{2R eps(k)}.

The weight moments build Toeplitz matrices whose leading principal minors
D_n give everything else: the recurrence (Verblunsky) coefficients arrive
as determinant ratios

    u_n = D_n[w/z] / D_n[w],          alpha_n = (-1)^n u_{n+1},

with u_0 = 1 by convention.  The forward recursion of discrete-Painleve-II
type is never used as a source of values, only as a per-entry residual
check on the ratios (it needs seeds and can amplify error; the ratios are
well-defined at any size once the precision is adequate).

Single-particle wave functions live on absolute site indices y = L + x, so
tables here are geometry-free; the lattice layer shifts them into place.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import mpmath as mp

from . import hydro
from .errors import (
    DomainError,
    PrecisionInsufficientError,
    TruncationWarning,
    WindowTooSmallError,
)
from .numerics import (
    DEFAULT_CTX,
    PrecisionContext,
    fft_pow2,
    lu_det,
    pow2_at_least,
    principal_minors,
)
from .special import deformed_bessel_table, dispersion, moment_table

ALPHA_MAX = 0.125

DPII_RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class WeightSpec:
    """Positive even weight e^{2R(cos k + alpha cos 2k)} on the unit circle."""

    R: float
    alpha: float

    def __post_init__(self):
        if not self.R > 0:
            raise DomainError("R must be positive")
        if not 0 <= self.alpha <= ALPHA_MAX:
            raise DomainError("alpha must lie in [0, 1/8]")


@dataclass(frozen=True)
class VerblunskySequence:
    """u_0..u_nmax from determinant ratios, with dPII residuals attached.

    residuals[i] is the recursion defect at n = i + 2 (the recursion
    involves u_{n-2}..u_{n+2}, so interior indices start at 2).
    """

    u: tuple
    residuals: tuple
    source: str
    R: float
    alpha: float
    bits: int

    @property
    def nmax(self) -> int:
        return len(self.u) - 1

    def alpha_coeff(self, k: int):
        """Signed Szego coefficient alpha_k = (-1)^k u_{k+1}, alpha_{-1} = -1."""
        if k == -1:
            return mp.mpf(-1)
        return (-1) ** k * self.u[k + 1]

    def rho(self, k: int):
        a = self.alpha_coeff(k)
        return mp.sqrt(1 - a * a)


def dpii_defect(u, n: int, R, alpha):
    """Defect of the dPII-hierarchy recursion at index n (needs u_{n-2..n+2}):

    n u_n / (R (1-u_n^2)) - u_{n-1} - u_{n+1}
      + 2 alpha (u_{n-2}(1-u_{n-1}^2) - u_n (u_{n-1}+u_{n+1})^2
                 + u_{n+2}(1-u_{n+1}^2))
    """
    R = mp.mpf(R)
    alpha = mp.mpf(alpha)
    lhs = n * u[n] / (R * (1 - u[n] ** 2))
    rhs = u[n - 1] + u[n + 1] - 2 * alpha * (
        u[n - 2] * (1 - u[n - 1] ** 2)
        - u[n] * (u[n - 1] + u[n + 1]) ** 2
        + u[n + 2] * (1 - u[n + 1] ** 2)
    )
    return lhs - rhs


class _WeightWorkspace:
    """Moment matrices, principal minors, and ratio coefficients for one
    weight at one precision.  Grown geometrically on demand."""

    def __init__(self, w: WeightSpec, ctx: PrecisionContext):
        self.w = w
        self.ctx = ctx
        self.nmax = 0
        self.minors_w = []       # D_1 .. D_nmax
        self.minors_shift = []   # D_1[w/z] .. D_nmax[w/z]
        self._det_checked = 0

    def moments(self, max_order: int):
        return moment_table(2 * mp.mpf(self.w.R), mp.mpf(self.w.alpha),
                            max_order, self.ctx)

    def ensure(self, nmax: int, shifted: bool = False):
        need_base = nmax > self.nmax
        need_shift = shifted and (len(self.minors_shift) < nmax)
        if not (need_base or need_shift):
            return
        n = max(nmax, 2 * self.nmax, 8)
        mom = self.moments(n + 2)
        with self.ctx.workprec():
            A = [[mom[j - l] for l in range(n)] for j in range(n)]
            self.minors_w = principal_minors(A)
            if shifted or self.minors_shift:
                B = [[mom[j - l + 1] for l in range(n)] for j in range(n)]
                self.minors_shift = principal_minors(B)
        self.nmax = n

    def det(self, n: int):
        if n == 0:
            return mp.mpf(1)
        self.ensure(n)
        return self.minors_w[n - 1]

    def det_consistency_check(self, n: int):
        """Pivoted-LU re-computation of D_n; disagreement means the bit
        count cannot support this matrix size."""
        if n == 0 or n <= self._det_checked:
            return
        mom = self.moments(n + 2)
        with self.ctx.workprec():
            A = [[mom[j - l] for l in range(n)] for j in range(n)]
            other = lu_det(A)
            ref = self.det(n)
            if abs(other - ref) > abs(ref) * mp.ldexp(1, -(self.ctx.bits // 4)):
                raise PrecisionInsufficientError(
                    f"Toeplitz determinant of size {n} unstable at "
                    f"{self.ctx.bits} bits"
                )
        self._det_checked = n

    def u_seq(self, nmax: int):
        self.ensure(nmax, shifted=True)
        with self.ctx.workprec():
            u = [mp.mpf(1)]
            for n in range(1, nmax + 1):
                u.append(self.minors_shift[n - 1] / self.minors_w[n - 1])
        return u


_ws_cache: dict = {}


def _workspace(w: WeightSpec, ctx: PrecisionContext) -> _WeightWorkspace:
    key = (mp.mpf(w.R), mp.mpf(w.alpha), ctx.bits)
    ws = _ws_cache.get(key)
    if ws is None:
        ws = _WeightWorkspace(w, ctx)
        _ws_cache[key] = ws
    return ws


def toeplitz_det(n: int, w: WeightSpec, ctx: PrecisionContext = DEFAULT_CTX):
    """D_n: determinant of the n x n moment matrix of the weight.

    Positive for every n (positive weight); D_0 = 1.  An LU consistency
    check guards against insufficient precision.
    """
    if n < 0:
        raise DomainError("n must be nonnegative")
    ws = _workspace(w, ctx)
    val = ws.det(n)
    ws.det_consistency_check(n)
    if not val > 0:
        raise PrecisionInsufficientError(
            f"non-positive Toeplitz determinant D_{n}; raise the precision"
        )
    return val


def verblunsky(nmax: int, w: WeightSpec, ctx: PrecisionContext = DEFAULT_CTX,
               residual_tol: float = DPII_RESIDUAL_TOL) -> VerblunskySequence:
    """Recurrence coefficients u_0..u_nmax from determinant ratios.

    Every interior index carries the dPII recursion defect; a blowup there
    signals insufficient precision for this (R, nmax).
    """
    if nmax < 2:
        raise DomainError("nmax must be >= 2")
    ws = _workspace(w, ctx)
    u = ws.u_seq(nmax)
    with ctx.workprec():
        residuals = tuple(
            dpii_defect(u, n, w.R, w.alpha) for n in range(2, nmax - 1)
        )
    worst = max((abs(r) for r in residuals), default=mp.mpf(0))
    if worst > residual_tol:
        raise PrecisionInsufficientError(
            f"dPII residual {mp.nstr(worst, 5)} exceeds {residual_tol}; "
            f"raise the precision"
        )
    # |u_n| < 1 always (positive weight); the sign is positive through the
    # hydrodynamic window but may oscillate in the exponentially small tail
    # beyond the turning point when alpha > 0.
    for n, val in enumerate(u[1:], start=1):
        if not abs(val) < 1:
            raise PrecisionInsufficientError(
                f"|u_{n}| = {mp.nstr(abs(val), 5)} not below 1"
            )
    return VerblunskySequence(
        u=tuple(u), residuals=residuals, source="determinant-ratio",
        R=w.R, alpha=w.alpha, bits=ctx.bits,
    )


# ---------------------------------------------------------------------------
# Polynomial evaluation
# ---------------------------------------------------------------------------

def _kappa0(w: WeightSpec, ctx: PrecisionContext):
    m0 = moment_table(2 * mp.mpf(w.R), mp.mpf(w.alpha), 2, ctx)[0]
    return 1 / mp.sqrt(m0)


def _szego_run(n: int, zs, seq: VerblunskySequence, w: WeightSpec,
               ctx: PrecisionContext):
    """(P_n(z), P_n*(z)) for every z in zs, by the Szego recursion."""
    k0 = _kappa0(w, ctx)
    P = [k0 * mp.mpc(1) for _ in zs]
    Ps = [k0 * mp.mpc(1) for _ in zs]
    for k in range(n):
        a = seq.alpha_coeff(k)
        r = seq.rho(k)
        for i, z in enumerate(zs):
            zp = z * P[i]
            P[i] = (zp - a * Ps[i]) / r
            Ps[i] = (Ps[i] - a * zp) / r
    return P, Ps


def ortho_poly(n: int, z, seq: VerblunskySequence, w: WeightSpec,
               ctx: PrecisionContext = DEFAULT_CTX, cross_check: bool = True):
    """(P_n(z), P_n*(z)); coefficients are real since the weight is even.

    The value is cross-checked against the three-term recurrence that
    avoids reverse polynomials.
    """
    if seq.nmax < n:
        raise DomainError("sequence does not cover the requested degree")
    z = mp.mpc(z)
    with ctx.workprec():
        (Pn,), (Psn,) = _szego_run(n, [z], seq, w, ctx)
        if cross_check and n >= 1:
            alt = _three_term_run(n, z, seq, w, ctx)
            scale = max(abs(Pn), mp.mpf(1))
            if abs(alt - Pn) > scale * mp.ldexp(1, -(ctx.bits // 2)):
                raise PrecisionInsufficientError(
                    f"Szego and three-term evaluations of P_{n} disagree"
                )
    return Pn, Psn


def _three_term_run(n: int, z, seq, w, ctx):
    """P_n(z) by the recurrence rho_k P_{k+1} = (a_k/a_{k-1} + z) P_k
    - (a_k/a_{k-1}) rho_{k-1} z P_{k-1}."""
    k0 = _kappa0(w, ctx)
    pm1 = mp.mpc(0)
    p = k0 * mp.mpc(1)
    for k in range(n):
        a_ratio = seq.alpha_coeff(k) / seq.alpha_coeff(k - 1)
        nxt = ((a_ratio + z) * p - a_ratio * (seq.rho(k - 1) if k >= 1 else mp.mpf(0)) * z * pm1)
        nxt /= seq.rho(k)
        pm1, p = p, nxt
    return p


def ortho_poly_coeffs(nmax: int, seq: VerblunskySequence, w: WeightSpec,
                      ctx: PrecisionContext = DEFAULT_CTX):
    """Coefficient rows [c_{n,0}, ..., c_{n,n}] of P_0..P_nmax."""
    with ctx.workprec():
        k0 = _kappa0(w, ctx)
        P = [k0]
        Ps = [k0]
        rows = [list(P)]
        for k in range(nmax):
            a = seq.alpha_coeff(k)
            r = seq.rho(k)
            zP = [mp.mpf(0)] + P
            Ps_pad = Ps + [mp.mpf(0)]
            P = [(x - a * y) / r for x, y in zip(zP, Ps_pad)]
            Ps = [(y - a * x) / r for x, y in zip(zP, Ps_pad)]
            rows.append(list(P))
        return rows


# ---------------------------------------------------------------------------
# Single-particle wave functions
# ---------------------------------------------------------------------------

def _decay_pad(tau, bits: int) -> int:
    """Distance past the propagator light cone where Fourier coefficients of
    e^{tau eps} drop below ~2^(-0.55 bits): solves d (ln(2d/tau) - 1) = target."""
    tau = max(float(tau), 0.5)
    target = 0.55 * bits * 0.6931 + 30
    import math

    d = max(8.0, tau)
    for _ in range(40):
        g = math.log(2 * d / tau) - 1
        if g < 0.2:
            d *= 2
            continue
        d_new = target / g
        if abs(d_new - d) < 0.5:
            break
        d = 0.5 * (d + d_new)
    return int(math.ceil(d + tau)) + 8


@dataclass(frozen=True)
class WaveFunctionTable:
    """phi_l on absolute sites y (the lattice's x is y - L)."""

    l: int
    y0: int
    values: tuple

    def __call__(self, y: int):
        i = y - self.y0
        if 0 <= i < len(self.values):
            return self.values[i]
        return mp.mpf(0)

    @property
    def y1(self) -> int:
        return self.y0 + len(self.values) - 1


def wavefunctions(lmax: int, w: WeightSpec,
                  ctx: PrecisionContext = DEFAULT_CTX,
                  window=None, seq: VerblunskySequence | None = None):
    """Tables of phi_0..phi_lmax, each evaluated two independent ways.

    The production values come from Fourier coefficients of
    P_l(e^{ik}) e^{R eps(k)} (one FFT per degree); the Szego-derived
    recursion

        rho_l phi_{l+1}(y) = phi_l(y-1) + (-1)^{l+1} u_{l+1} phi_l(l-y)

    then re-derives each table and the two must agree to working accuracy.
    """
    if seq is None:
        seq = verblunsky(max(2, lmax + 1), w, ctx)
    R = mp.mpf(w.R)
    alpha = mp.mpf(w.alpha)
    if window is None:
        pad = _decay_pad(R * (1 + 2 * alpha), ctx.bits)
        window = (-(pad + lmax + 1), lmax + pad)
    y0, y1 = window
    with ctx.workprec():
        M = pow2_at_least(max(
            1024, 4 * (int(mp.ceil(2 * R * (1 + 2 * alpha))) + lmax
                       + max(abs(y0), abs(y1)) + 32)
        ))
        two_pi = 2 * mp.pi
        ks = [two_pi * j / M for j in range(M)]
        half_weight = [mp.exp(R * dispersion(k, alpha)) for k in ks]
        zs = [mp.expj(k) for k in ks]
        k0 = _kappa0(w, ctx)
        P = [mp.mpc(k0) for _ in range(M)]
        Ps = [mp.mpc(k0) for _ in range(M)]
        tables = []
        for l in range(lmax + 1):
            out = fft_pow2([hw * p for hw, p in zip(half_weight, P)])
            vals = tuple(out[y % M].real / M for y in range(y0, y1 + 1))
            tables.append(WaveFunctionTable(l=l, y0=y0, values=vals))
            if l < lmax:
                a = seq.alpha_coeff(l)
                r = seq.rho(l)
                for i in range(M):
                    zp = zs[i] * P[i]
                    P[i] = (zp - a * Ps[i]) / r
                    Ps[i] = (Ps[i] - a * zp) / r
        _validate_tables(tables, seq, ctx, y0, y1)
    return tables


def _validate_tables(tables, seq, ctx, y0, y1):
    scale = max(abs(v) for v in tables[0].values)
    edge_tol = scale * mp.ldexp(1, -(ctx.bits // 2))
    for t in tables:
        if abs(t.values[0]) > edge_tol or abs(t.values[-1]) > edge_tol:
            raise WindowTooSmallError(
                f"phi_{t.l} boundary mass exceeds {mp.nstr(edge_tol, 3)}; "
                f"widen the window"
            )
    # independent reconstruction through the Szego-derived recursion
    agree_tol = scale * mp.ldexp(1, -(ctx.bits // 3))
    for l in range(len(tables) - 1):
        cur, nxt = tables[l], tables[l + 1]
        u_next = seq.u[l + 1]
        r = mp.sqrt(1 - u_next * u_next)
        sign = (-1) ** (l + 1)
        for y in range(y0 + 1, y1):
            rec = (cur(y - 1) + sign * u_next * cur(l - y)) / r
            if abs(rec - nxt(y)) > agree_tol:
                raise PrecisionInsufficientError(
                    f"wave-function recursion defect at l={l + 1}, y={y}"
                )


def wavefunction_recursion_residual(tables, seq, ctx: PrecisionContext):
    """Largest defect of the degree-raising recursion over all tables."""
    worst = mp.mpf(0)
    for l in range(len(tables) - 1):
        cur, nxt = tables[l], tables[l + 1]
        u_next = seq.u[l + 1]
        r = mp.sqrt(1 - u_next * u_next)
        sign = (-1) ** (l + 1)
        for y in range(cur.y0 + 1, cur.y1):
            rec = (cur(y - 1) + sign * u_next * cur(l - y)) / r
            worst = max(worst, abs(rec - nxt(y)))
    return worst


def three_point_residual(tables, seq, w: WeightSpec,
                         ctx: PrecisionContext = DEFAULT_CTX):
    """Largest defect of the nearest-neighbor three-point relation
    (only valid for alpha = 0):

    (y/R) phi_n(y) = (n/R - a_{n-1} a_n) phi_n(y)
                     + (phi_n(y+1) + phi_n(y-1))/2
                     - a_n phi_n(n-y) + a_{n-1} phi_n(n-y-1)
    """
    if w.alpha != 0:
        raise DomainError("three-point relation only holds for alpha = 0")
    R = mp.mpf(w.R)
    worst = mp.mpf(0)
    for t in tables:
        n = t.l
        am1 = seq.alpha_coeff(n - 1)
        an = seq.alpha_coeff(n)
        for y in range(t.y0 + 1, t.y1):
            lhs = mp.mpf(y) / R * t(y)
            rhs = ((n / R - am1 * an) * t(y)
                   + (t(y + 1) + t(y - 1)) / 2
                   - an * t(n - y) + am1 * t(n - y - 1))
            worst = max(worst, abs(lhs - rhs))
    return worst


# ---------------------------------------------------------------------------
# Identities: Fredholm form of the determinant, Lax pair, ratio asymptotics
# ---------------------------------------------------------------------------

def szego_constant(w: WeightSpec, ctx: PrecisionContext = DEFAULT_CTX):
    """Limit of D_n: exp(R^2 (1 + 2 alpha^2))."""
    with ctx.workprec():
        R = mp.mpf(w.R)
        a = mp.mpf(w.alpha)
        return mp.exp(R * R * (1 + 2 * a * a))


def bessel_gram_matrix(offset: int, size: int, w: WeightSpec,
                       ctx: PrecisionContext = DEFAULT_CTX):
    """The semi-infinite Gram matrix K_{jl} = sum_p b_{j+p} b_{l+p},
    b_i = J^(alpha)_{offset+i+1}(2R), truncated to size x size.

    Computed by the corner recursion K_{jl} = b_j b_l + K_{j+1,l+1}.
    """
    R2 = 2 * mp.mpf(w.R)
    with ctx.workprec():
        tail_bits = (2 * ctx.bits) // 3
        # extend past the requested block until entries are negligible
        ext = size
        table = deformed_bessel_table(R2, mp.mpf(w.alpha), offset + size + ext + 8, ctx)
        b = [table[offset + i + 1] for i in range(size + ext)]
        cut = mp.ldexp(1, -tail_bits)
        while max(abs(x) for x in b[-8:]) > cut:
            ext *= 2
            table = deformed_bessel_table(R2, mp.mpf(w.alpha),
                                          offset + size + ext + 8, ctx)
            b = [table[offset + i + 1] for i in range(size + ext)]
        L = len(b)
        K = [[mp.mpf(0)] * L for _ in range(L)]
        for j in range(L - 1, -1, -1):
            Kj = K[j]
            bj = b[j]
            nxt = K[j + 1] if j + 1 < L else None
            for l in range(L - 1, j - 1, -1):
                v = bj * b[l]
                if nxt is not None and l + 1 < L:
                    v += nxt[l + 1]
                Kj[l] = v
                K[l][j] = v
        block = [row[:size] for row in K[:size]]
        if abs(block[size - 1][size - 1]) > mp.mpf(ctx.rel_tol) ** 2:
            warnings.warn(
                f"Gram matrix truncation at {size} leaves diagonal "
                f"{mp.nstr(block[size - 1][size - 1], 3)}", TruncationWarning,
            )
        return block


def gcbo_check(n: int, w: WeightSpec, truncation: int,
               ctx: PrecisionContext = DEFAULT_CTX):
    """Relative defect of the Toeplitz <-> Fredholm determinant identity

        D_n = exp(R^2(1+2 alpha^2)) det(1 - K_n)

    with K_n the Bessel Gram matrix starting at offset n.
    """
    lhs = toeplitz_det(n, w, ctx)
    with ctx.workprec():
        K = bessel_gram_matrix(n, truncation, w, ctx)
        A = [[(1 if i == j else 0) - K[i][j] for j in range(truncation)]
             for i in range(truncation)]
        det = lu_det(A)
        rhs = szego_constant(w, ctx) * det
        return abs(lhs / rhs - 1)


def _scalar_product(f_builder, w: WeightSpec, degree: int,
                    seq: VerblunskySequence, ctx: PrecisionContext):
    """(1/2pi) int w(e^{ik}) f(k) dk with f built from polynomial node values.

    ``f_builder(P+, Ps+, P-, Ps-, z)`` receives P_degree and its reverse at
    e^{ik} and e^{-ik} plus z = e^{ik}.
    """
    R = mp.mpf(w.R)
    alpha = mp.mpf(w.alpha)
    M = pow2_at_least(max(512, 4 * (int(mp.ceil(2 * R * (1 + 2 * alpha)))
                                    + 2 * degree + 16)))
    two_pi = 2 * mp.pi
    ks = [two_pi * j / M for j in range(M)]
    zs = [mp.expj(k) for k in ks]
    zbars = [mp.conj(z) for z in zs]
    Pp, Psp = _szego_run(degree, zs, seq, w, ctx)
    Pm, Psm = _szego_run(degree, zbars, seq, w, ctx)
    acc = mp.mpc(0)
    for i, k in enumerate(ks):
        wgt = mp.exp(2 * R * dispersion(k, alpha))
        acc += wgt * f_builder(Pp[i], Psp[i], Pm[i], Psm[i], zs[i])
    return acc / M


def _beta_closed(seq, n: int):
    a = seq.alpha_coeff
    return (a(n) * (a(n - 1) ** 2 * (a(n) + a(n - 2)) - a(n - 2))
            - (1 - a(n) ** 2) * a(n - 1) * a(n + 1))


def _beta0(seq):
    # the a_{-2} dependence cancels at n = 0: beta_0 = a_0^2 + (1-a_0^2) a_1
    a = seq.alpha_coeff
    return a(0) ** 2 + (1 - a(0) ** 2) * a(1)


def _gamma_closed(seq, n: int, R):
    a = seq.alpha_coeff
    b_prev = _beta_closed(seq, n - 1) if n - 1 >= 1 else _beta0(seq)
    b_n = _beta_closed(seq, n) if n >= 1 else _beta0(seq)
    return mp.mpf(R) * (a(n - 3) * (a(n - 2) ** 2 - 1)
                        + a(n - 1) * (a(n - 2) ** 2 - b_prev - b_n))


def _gamma_quadrature(n: int, seq, w, ctx):
    # <zeta^2 P_n* | P_n> = (1/2pi) int w e^{-2ik} P_n*(e^{-ik}) P_n(e^{ik}) dk
    return _scalar_product(
        lambda Pp, Psp, Pm, Psm, z: Psm * Pp / (z * z), w, n, seq, ctx
    ).real


def lax_coefficients(n: int, z, seq: VerblunskySequence, w: WeightSpec,
                     ctx: PrecisionContext = DEFAULT_CTX):
    """(a_n(z), b_n(z)) of the derivative identity
    dP_n/dz = a_n P_n - b_n P_n*, in closed form through the u's."""
    R = mp.mpf(w.R)
    al = mp.mpf(w.alpha)
    a = seq.alpha_coeff
    z = mp.mpc(z)
    beta = _beta_closed(seq, n) if n >= 1 else _beta0(seq)
    if n >= 2:
        gamma = _gamma_closed(seq, n, R)
    else:
        gamma = R * _gamma_quadrature(n, seq, w, ctx)
    an = R * (-2 * al * a(n - 1) * a(n)
              + (mp.mpf(n) / R - a(n - 1) * a(n) + 2 * al * beta) / z
              + (1 - 2 * al * a(n - 1) * a(n)) / z ** 2
              + 2 * al / z ** 3)
    s = a(n - 1) ** 2 * (a(n) + a(n - 2)) - a(n - 2)
    bn = R * (2 * al * a(n)
              + (s - n * a(n - 1) / R + 2 * al * gamma / R) / z
              + (2 * al * s - a(n - 1)) / z ** 2
              - 2 * al * a(n - 1) / z ** 3)
    return an, bn


def lax_residual(n: int, z, w: WeightSpec,
                 ctx: PrecisionContext = DEFAULT_CTX):
    """(derivative defect, gamma compatibility defect or None).

    The derivative defect is |dP_n/dz - (a_n P_n - b_n P_n*)| with dP_n/dz
    from symmetric differencing at a step far above the roundoff floor
    (cancellation-free at extended precision).  For n >= 2 the closed-form
    gamma is also compared against its quadrature definition.
    """
    if z == 0:
        raise DomainError("z must be nonzero")
    seq = verblunsky(max(2, n + 2), w, ctx)
    z = mp.mpc(z)
    with ctx.workprec():
        an, bn = lax_coefficients(n, z, seq, w, ctx)
        Pn, Psn = ortho_poly(n, z, seq, w, ctx)
        h = mp.ldexp(max(abs(z), mp.mpf(1)), -(ctx.bits // 3))
        if z.imag == 0:
            # true complex-step derivative at real evaluation points
            Pp, _ = ortho_poly(n, z + mp.mpc(0, h), seq, w, ctx)
            dP = mp.mpc(Pp.imag / h, 0)
        else:
            Pp, _ = ortho_poly(n, z + h, seq, w, ctx)
            Pm, _ = ortho_poly(n, z - h, seq, w, ctx)
            dP = (Pp - Pm) / (2 * h)
        deriv_defect = abs(dP - (an * Pn - bn * Psn))
        gamma_defect = None
        if n >= 2:
            gq = mp.mpf(w.R) * _gamma_quadrature(n, seq, w, ctx)
            gamma_defect = abs(gq - _gamma_closed(seq, n, mp.mpf(w.R)))
    return deriv_defect, gamma_defect


def limiting_ratio(z, lam: float, alpha: float):
    """r(z) = (z - 1 + sqrt((z+1)^2 - 4 u^2 z)) / (2 sqrt(1 - u^2)), the
    large-degree limit of P_{n+1}(z)/P_n(z) at fixed lam = n/(2R)."""
    u = mp.mpf(hydro.u_of_lambda(float(lam), float(alpha)))
    z = mp.mpc(z)
    root = mp.sqrt((z + 1) ** 2 - 4 * u * u * z)
    return (z - 1 + root) / (2 * mp.sqrt(1 - u * u))


def ratio_check(n: int, z, w: WeightSpec,
                ctx: PrecisionContext = DEFAULT_CTX):
    """(finite-degree ratio P_{n+1}(z)/P_n(z), its hydrodynamic limit r(z))."""
    z = mp.mpc(z)
    if abs(z) <= 1:
        raise DomainError("need |z| > 1")
    seq = verblunsky(n + 2, w, ctx)
    with ctx.workprec():
        Pn, _ = ortho_poly(n, z, seq, w, ctx)
        Pn1, _ = ortho_poly(n + 1, z, seq, w, ctx)
        ratio = Pn1 / Pn
        lam = n / (2 * mp.mpf(w.R))
        return ratio, limiting_ratio(z, float(lam), w.alpha)


def log_derivative_limit(z, lam: float, alpha: float):
    """Hydrodynamic limit of (z/R) d log(P_n(z) e^{g(z)/2})/dz for |z| > 1:

        lam + (2a(z + 1/z) + 1 - 4a(1-u^2)) ((z+1)/(2 sqrt z))
              sqrt((z+1)^2/z - 4u^2).

    Its boundary value at z = e^{ik}, |k| < k_c, is lam + Upsilon(k).
    """
    u = mp.mpf(hydro.u_of_lambda(float(lam), float(alpha)))
    z = mp.mpc(z)
    a = mp.mpf(alpha)
    pref = 2 * a * (z + 1 / z) + 1 - 4 * a * (1 - u * u)
    return (mp.mpf(lam)
            + pref * (z + 1) / (2 * mp.sqrt(z)) * mp.sqrt((z + 1) ** 2 / z - 4 * u * u))


def log_derivative_check(k: float, n: int, w: WeightSpec,
                         ctx: PrecisionContext = DEFAULT_CTX,
                         radius: float = 1.1):
    """Finite-degree (z/R) d log(P_n(z) e^{g/2})/dz against its limit.

    Evaluated at z = radius e^{ik} with radius > 1: on the circle itself a
    finite degree oscillates between the two saddle branches, while just
    outside the convergence is pointwise.  The limit's boundary value on
    the band |k| < k_c is lam + Upsilon(k).
    """
    if radius <= 1:
        raise DomainError("radius must exceed 1")
    R = mp.mpf(w.R)
    lam = n / (2 * R)
    seq = verblunsky(n + 2, w, ctx)
    z = mp.mpf(radius) * mp.expj(mp.mpf(k))
    with ctx.workprec():
        h = mp.ldexp(1, -(ctx.bits // 3))
        Pp, _ = ortho_poly(n, z + h, seq, w, ctx)
        Pm, _ = ortho_poly(n, z - h, seq, w, ctx)
        Pn, _ = ortho_poly(n, z, seq, w, ctx)
        dlogP = (Pp - Pm) / (2 * h * Pn)
        alpha = mp.mpf(w.alpha)
        gprime = R * (1 - 1 / z ** 2 + 2 * alpha * (z - 1 / z ** 3))
        val = z / R * (dlogP + gprime / 2)
    return val, log_derivative_limit(z, float(lam), w.alpha)
