"""Universal limiting objects at the fluctuating-region edges: (higher)
Airy kernels, their Tracy-Widom-type Fredholm determinants, and the
(higher-order) tacnode kernels that govern a merger of two edges.

Order m = 1 (kernel built from the classical Airy function, cubic-root
scaling) covers generic edges and the standard tacnode; m = 2 (quintic
phase, fifth-root scaling) appears when the dispersion is tuned quartic.
All semi-infinite integrals run over [0, cutoff] with tail estimates from
the super-exponential Airy decay; the resolvent of (1 - shifted kernel) is
factorized once per grid and reused across every kernel entry.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import mpmath as mp

from .errors import DomainError, TruncationWarning
from .numerics import (
    DEFAULT_CTX,
    KernelGrid,
    PrecisionContext,
    fredholm_det_grid,
    fredholm_resolve,
    gauss_legendre,
)
from .special import airy_sum_matrix

DEFAULT_CUTOFF = 16.0
DEFAULT_NODES = 48


@dataclass(frozen=True)
class AiryFamily:
    m: int
    sigma: float

    def __post_init__(self):
        if self.m < 1:
            raise DomainError("m must be a positive integer")

    @property
    def order(self) -> int:
        return 2 * self.m + 1


@dataclass(frozen=True)
class TacnodeParams:
    m: int
    sigma: float

    def __post_init__(self):
        if self.m not in (1, 2):
            raise DomainError("tacnode order m must be 1 or 2")

    @property
    def order(self) -> int:
        return 2 * self.m + 1


def _airy_values(q: int, points, ctx: PrecisionContext):
    """Ai_q at a list of reals, through the shared-ray batch evaluator."""
    M = airy_sum_matrix(q, points, [mp.mpf(0)], ctx)
    return [row[0] for row in M]


def airy_kernel(s, sp, fam: AiryFamily, ctx: PrecisionContext = DEFAULT_CTX,
                n: int = 64, cutoff: float = DEFAULT_CUTOFF):
    """Shifted kernel K_{Ai,sigma}(s,s') = int_sigma^inf Ai_q(s+u) Ai_q(s'+u) du.

    The semi-infinite range is truncated at sigma + cutoff; when the tail
    estimate exceeds rel_tol the cutoff is doubled (twice at most) before
    a TruncationWarning fires."""
    q = fam.order
    s = mp.mpf(s)
    sp = mp.mpf(sp)
    with ctx.workprec():
        sig = mp.mpf(fam.sigma)
        for attempt in range(3):
            length = cutoff * (2 ** attempt)
            nodes = n * (2 ** attempt)
            rule = gauss_legendre(nodes, sig, sig + length, ctx)
            va = _airy_values(q, [s + u for u in rule.nodes], ctx)
            vb = va if sp == s else _airy_values(q, [sp + u for u in rule.nodes], ctx)
            val = mp.fsum(w * a * b for w, a, b in zip(rule.weights, va, vb))
            tail = abs(va[-1] * vb[-1]) * 4
            if tail <= mp.mpf(ctx.rel_tol):
                return val
        warnings.warn(
            f"Airy-kernel tail at cutoff {length} is {mp.nstr(tail, 3)}",
            TruncationWarning,
        )
        return val


def airy_kernel_cd(s, sp, sigma=0.0):
    """Christoffel-Darboux form of the m = 1 kernel (independent check)."""
    a = mp.mpf(s) + mp.mpf(sigma)
    b = mp.mpf(sp) + mp.mpf(sigma)
    if a == b:
        return mp.airyai(a, derivative=1) ** 2 - a * mp.airyai(a) ** 2
    return (mp.airyai(a) * mp.airyai(b, derivative=1)
            - mp.airyai(a, derivative=1) * mp.airyai(b)) / (a - b)


def _airy_kernel_grid(q: int, sigma, n: int, cutoff, ctx: PrecisionContext):
    """Nystrom grid of K^{(q)}_{Ai,sigma} acting on [0, cutoff]."""
    rule = gauss_legendre(n, 0, cutoff, ctx)
    inner = gauss_legendre(n, 0, cutoff, ctx)
    sigma = mp.mpf(sigma)
    V = airy_sum_matrix(q, [x + sigma for x in rule.nodes], list(inner.nodes), ctx)
    m = len(rule.nodes)
    vals = [[mp.mpf(0)] * m for _ in range(m)]
    Vw = [[V[i][k] * inner.weights[k] for k in range(m)] for i in range(m)]
    for i in range(m):
        for j in range(i, m):
            v = mp.fdot(Vw[i], V[j])
            vals[i][j] = v
            vals[j][i] = v
    return KernelGrid(rule=rule, values=vals)


def tw_distribution(sigma, m: int, ctx: PrecisionContext = DEFAULT_CTX,
                    n: int = DEFAULT_NODES, cutoff: float = DEFAULT_CUTOFF):
    """det(1 - K^{(2m+1)}_{Ai,sigma}) on [0, inf): the (higher) Tracy-Widom
    law of the rescaled block observable; monotone increasing in sigma."""
    if m not in (1, 2):
        raise DomainError("m must be 1 or 2")
    q = 2 * m + 1
    with ctx.workprec():
        prev = None
        size = n
        for _ in range(4):
            det = fredholm_det_grid(_airy_kernel_grid(q, sigma, size, cutoff, ctx))
            if prev is not None and abs(det - prev) <= mp.mpf(ctx.rel_tol) * abs(det):
                return det
            prev = det
            size *= 2
    warnings.warn("Tracy-Widom determinant: node doubling did not settle "
                  f"below {ctx.rel_tol}; returning the finest value",
                  TruncationWarning)
    return prev


# ---------------------------------------------------------------------------
# Tacnode kernels
# ---------------------------------------------------------------------------

class _TacnodeWorkspace:
    """Grid, ancillary-function machinery, and resolvent for one (m, sigma).

    The operator is the Airy kernel shifted by 2^{(q-1)/q} sigma; the
    vectors it resolves are

        A_s(u) = Ai_q(s + 2^{1/q} u + sigma)
                 - int_0^inf Ai_q(u + v + 2^{(q-1)/q} sigma)
                              Ai_q(-s + 2^{1/q} v + sigma) dv.
    """

    def __init__(self, params: TacnodeParams, ctx: PrecisionContext,
                 n: int, cutoff):
        q = params.order
        self.q = q
        self.params = params
        self.ctx = ctx
        with ctx.workprec():
            self.sigma = mp.mpf(params.sigma)
            self.c_small = mp.power(2, mp.mpf(1) / q)        # 2^{1/q}
            self.c_big = mp.power(2, mp.mpf(q - 1) / q)      # 2^{(q-1)/q}
            shift = self.c_big * self.sigma
            self.grid = _airy_kernel_grid(q, shift, n, cutoff, ctx)
            nodes = self.grid.rule.nodes
            # shared inner matrix W[i][k] = Ai_q(u_i + v_k + shift) w_k
            inner = self.grid.rule
            V = airy_sum_matrix(q, [u + shift for u in nodes],
                                list(inner.nodes), ctx)
            self.W = [[V[i][k] * inner.weights[k] for k in range(len(nodes))]
                      for i in range(len(nodes))]
            self.inner_nodes = inner.nodes
            self._a_cache = {}
            self._resolve_cache = {}

    def a_vector(self, s):
        s = mp.mpf(s)
        key = s
        if key in self._a_cache:
            return self._a_cache[key]
        ctx = self.ctx
        with ctx.workprec():
            nodes = self.grid.rule.nodes
            direct = _airy_values(self.q,
                                  [s + self.c_small * u + self.sigma for u in nodes],
                                  ctx)
            t2 = _airy_values(self.q,
                              [-s + self.c_small * v + self.sigma
                               for v in self.inner_nodes], ctx)
            avec = [direct[i] - mp.fdot(self.W[i], t2) for i in range(len(nodes))]
        self._a_cache[key] = avec
        return avec

    def resolved(self, s):
        s = mp.mpf(s)
        if s in self._resolve_cache:
            return self._resolve_cache[s]
        out = fredholm_resolve(self.grid, self.a_vector(s), self.ctx)
        self._resolve_cache[s] = out
        return out

    def coupling(self, s, sp):
        with self.ctx.workprec():
            w = self.grid.rule.weights
            av = self.a_vector(s)
            rv = self.resolved(sp)
            return self.c_small * mp.fsum(
                wi * ai * ri for wi, ai, ri in zip(w, av, rv)
            )


_tac_cache: dict = {}


def _tac_workspace(params: TacnodeParams, ctx: PrecisionContext,
                   n: int, cutoff) -> _TacnodeWorkspace:
    key = (params.m, mp.mpf(params.sigma), ctx.bits, n, mp.mpf(cutoff))
    ws = _tac_cache.get(key)
    if ws is None:
        ws = _TacnodeWorkspace(params, ctx, n, cutoff)
        _tac_cache[key] = ws
    return ws


def a_function(s, u, params: TacnodeParams,
               ctx: PrecisionContext = DEFAULT_CTX,
               n: int = DEFAULT_NODES, cutoff: float = DEFAULT_CUTOFF):
    """The ancillary vector A_s(u) of the tacnode coupling, u >= 0."""
    if mp.mpf(u) < 0:
        raise DomainError("u must be nonnegative")
    q = params.order
    s = mp.mpf(s)
    u = mp.mpf(u)
    with ctx.workprec():
        sigma = mp.mpf(params.sigma)
        c_small = mp.power(2, mp.mpf(1) / q)
        c_big = mp.power(2, mp.mpf(q - 1) / q)
        t1 = _airy_values(q, [s + c_small * u + sigma], ctx)[0]
        for attempt in range(3):
            length = cutoff * (2 ** attempt)
            inner = gauss_legendre(n * (2 ** attempt), 0, length, ctx)
            f1 = _airy_values(q, [u + v + c_big * sigma for v in inner.nodes], ctx)
            f2 = _airy_values(q, [-s + c_small * v + sigma for v in inner.nodes], ctx)
            tail = abs(f1[-1] * f2[-1]) * 4
            if tail <= mp.mpf(ctx.rel_tol):
                break
        else:
            warnings.warn(f"A_s tail at cutoff {length} is {mp.nstr(tail, 3)}",
                          TruncationWarning)
        return t1 - mp.fsum(w * a * b for w, a, b in zip(inner.weights, f1, f2))


def tacnode_kernel(s, sp, params: TacnodeParams,
                   ctx: PrecisionContext = DEFAULT_CTX,
                   n: int = DEFAULT_NODES, cutoff: float = DEFAULT_CUTOFF):
    """K_tac(s,s'|sigma) = K_{Ai,sigma}(-s,-s')
    + 2^{1/q} (A_s, (1 - K_{Ai, 2^{(q-1)/q} sigma})^{-1} A_s')."""
    ws = _tac_workspace(params, ctx, n, cutoff)
    first = airy_kernel(-mp.mpf(s), -mp.mpf(sp),
                        AiryFamily(m=params.m, sigma=params.sigma), ctx,
                        n=n, cutoff=cutoff)
    return first + ws.coupling(s, sp)


def kernel_table(params: TacnodeParams, s_grid,
                 ctx: PrecisionContext = DEFAULT_CTX,
                 n: int = DEFAULT_NODES, cutoff: float = DEFAULT_CUTOFF):
    """Dense K_tac values over s_grid x s_grid with one shared resolvent
    and one batched evaluation of the decoupled first term.

    Returns (matrix, metadata)."""
    s_grid = tuple(mp.mpf(s) for s in s_grid)
    ws = _tac_workspace(params, ctx, n, cutoff)
    m = len(s_grid)
    q = params.order
    with ctx.workprec():
        sig = mp.mpf(params.sigma)
        rule = gauss_legendre(n, sig, sig + cutoff, ctx)
        F = airy_sum_matrix(q, [-s for s in s_grid], list(rule.nodes), ctx)
        Fw = [[F[i][k] * rule.weights[k] for k in range(len(rule.nodes))]
              for i in range(m)]
        vals = [[mp.mpf(0)] * m for _ in range(m)]
        for i in range(m):
            for j in range(i, m):
                v = mp.fdot(Fw[i], F[j]) + ws.coupling(s_grid[i], s_grid[j])
                vals[i][j] = v
                vals[j][i] = v
    meta = {
        "m": params.m,
        "sigma": params.sigma,
        "nodes": n,
        "cutoff": cutoff,
        "bits": ctx.bits,
    }
    return vals, meta
