"""Extended-precision quadrature, dense linear algebra, and Nystrom machinery.

Everything here operates on mpmath values.  Matrices are plain lists of row
lists (mpmath.matrix is dict-backed and far too slow for the sizes needed
here).  All routines are deterministic: the same inputs and PrecisionContext
produce bit-identical outputs.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Sequence

import mpmath as mp

from .errors import (
    BudgetExceededError,
    DomainError,
    NonConvergenceError,
    SingularOperatorError,
    TruncationWarning,
)

# Guard bits added on top of the context precision inside computations.
GUARD = 32


def lattice_bits(R) -> int:
    """Minimum mantissa bits for moment-matrix work at imaginary-time width R.

    Toeplitz entries grow like exp(2R(1+2a^2)) and the inverse is badly
    conditioned; 8 bits per unit of R leaves better than 2x headroom.
    """
    return max(256, int(mp.ceil(8 * mp.mpf(R))))


@dataclass(frozen=True)
class PrecisionContext:
    """Working precision plus quadrature and truncation budgets."""

    bits: int = 256
    rel_tol: float = 1e-8
    max_nodes: int = 1 << 21

    def __post_init__(self):
        if self.bits < 64:
            raise DomainError(f"bits must be >= 64, got {self.bits}")
        if not self.rel_tol > 0:
            raise DomainError(f"rel_tol must be positive, got {self.rel_tol}")
        if self.max_nodes < 8:
            raise DomainError(f"max_nodes must be >= 8, got {self.max_nodes}")

    def workprec(self, guard: int = GUARD):
        return mp.workprec(self.bits + guard)

    @property
    def eps(self):
        return mp.ldexp(1, 1 - self.bits)

    def with_bits(self, bits: int) -> "PrecisionContext":
        return PrecisionContext(bits=bits, rel_tol=self.rel_tol, max_nodes=self.max_nodes)


DEFAULT_CTX = PrecisionContext()


def _agree(a, b, rel_tol, floor=0):
    """Two successive refinements agree: relative check with absolute floor."""
    diff = abs(a - b)
    scale = max(abs(a), abs(b))
    if scale == 0:
        return True
    return diff <= rel_tol * scale or diff <= floor


# ---------------------------------------------------------------------------
# Periodic trapezoid rule
# ---------------------------------------------------------------------------

def periodic_trapezoid(f, n_nodes: int, ctx: PrecisionContext = DEFAULT_CTX):
    """Normalized integral (1/2pi) * int_{-pi}^{pi} f(k) dk of a smooth
    2pi-periodic integrand, by the trapezoid rule with node doubling.

    Converges geometrically for entire periodic integrands.  Raises
    BudgetExceededError if doubling up to ctx.max_nodes never reaches
    rel_tol agreement between successive resolutions.
    """
    if n_nodes < 4:
        raise DomainError("n_nodes must be >= 4")
    with ctx.workprec():
        m = int(n_nodes)
        two_pi = 2 * mp.pi
        samples = [f(-mp.pi + two_pi * j / m) for j in range(m)]
        total = mp.fsum(samples)
        fmax = max((abs(s) for s in samples), default=mp.mpf(0))
        prev = total / m
        while True:
            if 2 * m > ctx.max_nodes:
                raise BudgetExceededError(
                    f"periodic_trapezoid: no rel_tol={ctx.rel_tol} agreement within "
                    f"{ctx.max_nodes} nodes"
                )
            mids = [f(-mp.pi + two_pi * (j + mp.mpf("0.5")) / m) for j in range(m)]
            total += mp.fsum(mids)
            fmax = max(fmax, max((abs(s) for s in mids), default=mp.mpf(0)))
            m *= 2
            cur = total / m
            floor = mp.ldexp(fmax, -(2 * ctx.bits) // 3)
            if _agree(cur, prev, ctx.rel_tol, floor=floor):
                return cur
            prev = cur


def periodic_trapezoid_fixed(f, n_nodes: int, ctx: PrecisionContext = DEFAULT_CTX):
    """Single-resolution trapezoid sum (1/2pi) int f; the caller owns the
    node-count rule.  Used where an a-priori oscillation count makes the
    doubling loop redundant."""
    if n_nodes > ctx.max_nodes:
        raise BudgetExceededError(
            f"requested {n_nodes} nodes exceeds budget {ctx.max_nodes}"
        )
    with ctx.workprec():
        m = int(n_nodes)
        two_pi = 2 * mp.pi
        return mp.fsum(f(-mp.pi + two_pi * j / m) for j in range(m)) / m


# ---------------------------------------------------------------------------
# Gauss-Legendre rules
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights on an interval [a, b]."""

    nodes: tuple
    weights: tuple
    a: object
    b: object

    def __post_init__(self):
        if any(w <= 0 for w in self.weights):
            raise DomainError("quadrature weights must be positive")
        for x0, x1 in zip(self.nodes, self.nodes[1:]):
            if not x0 < x1:
                raise DomainError("quadrature nodes must be strictly increasing")

    def integrate(self, f):
        return mp.fsum(w * f(x) for x, w in zip(self.nodes, self.weights))


_gl_cache: dict = {}


def _gauss_legendre_unit(n: int, prec: int):
    """Nodes/weights on [-1, 1] at the given precision, cached."""
    key = (n, prec)
    cached = _gl_cache.get(key)
    if cached is not None:
        return cached
    with mp.workprec(prec + GUARD):
        nodes = []
        weights = []
        for i in range((n + 1) // 2):
            # Chebyshev-like initial guess, then Newton on P_n; quadratic
            # convergence stalls only at the roundoff floor.
            x = mp.cos(mp.pi * (4 * i + 3) / (4 * n + 2))
            prev_dx = mp.inf
            for _ in range(60):
                p0, p1 = mp.mpf(1), x
                for k in range(1, n):
                    p0, p1 = p1, ((2 * k + 1) * x * p1 - k * p0) / (k + 1)
                dp = n * (x * p1 - p0) / (x * x - 1)
                dx = p1 / dp
                x -= dx
                if dx == 0 or abs(dx) >= prev_dx:
                    break
                prev_dx = abs(dx)
            p0, p1 = mp.mpf(1), x
            for k in range(1, n):
                p0, p1 = p1, ((2 * k + 1) * x * p1 - k * p0) / (k + 1)
            dp = n * (x * p1 - p0) / (x * x - 1)
            w = 2 / ((1 - x * x) * dp * dp)
            nodes.append(-x)
            weights.append(w)
        full_nodes = nodes + [-x for x in reversed(nodes[: n // 2])]
        full_weights = weights + list(reversed(weights[: n // 2]))
    result = (tuple(full_nodes), tuple(full_weights))
    _gl_cache[key] = result
    return result


def gauss_legendre(n: int, a, b, ctx: PrecisionContext = DEFAULT_CTX) -> QuadratureRule:
    """Gauss-Legendre rule on [a, b], exact for polynomials of degree 2n-1.

    A degenerate interval a == b yields an empty rule (integral zero).
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    a = mp.mpf(a)
    b = mp.mpf(b)
    if a > b:
        raise DomainError("need a <= b")
    if a == b:
        return QuadratureRule(nodes=(), weights=(), a=a, b=b)
    xs, ws = _gauss_legendre_unit(n, ctx.bits)
    with ctx.workprec():
        mid = (a + b) / 2
        half = (b - a) / 2
        nodes = tuple(mid + half * x for x in xs)
        weights = tuple(half * w for w in ws)
    return QuadratureRule(nodes=nodes, weights=weights, a=a, b=b)


# ---------------------------------------------------------------------------
# Dense linear algebra on lists of mpf rows
# ---------------------------------------------------------------------------

def matmul(A, B):
    n, k = len(A), len(B)
    m = len(B[0]) if k else 0
    Bcols = [[B[i][j] for i in range(k)] for j in range(m)]
    return [[mp.fdot(row, col) for col in Bcols] for row in A]


def matvec(A, v):
    return [mp.fdot(row, v) for row in A]


def lu_factor(A):
    """In-place LU with partial pivoting.  Returns (A, piv, parity)."""
    n = len(A)
    piv = list(range(n))
    parity = 1
    for k in range(n):
        p = k
        best = abs(A[k][k])
        for i in range(k + 1, n):
            v = abs(A[i][k])
            if v > best:
                best, p = v, i
        if best == 0:
            raise SingularOperatorError("exact zero pivot in LU factorization")
        if p != k:
            A[k], A[p] = A[p], A[k]
            piv[k], piv[p] = piv[p], piv[k]
            parity = -parity
        inv = 1 / A[k][k]
        row_k = A[k]
        tail = row_k[k + 1:]
        for i in range(k + 1, n):
            row_i = A[i]
            f = row_i[k] * inv
            row_i[k] = f
            if f:
                row_i[k + 1:] = [x - f * y for x, y in zip(row_i[k + 1:], tail)]
    return A, piv, parity


def lu_solve(factored, bs):
    """Solve A X = B for several right-hand sides given lu_factor output.

    ``bs`` is a list of column vectors; returns the list of solutions.
    """
    LU, piv, _ = factored
    n = len(LU)
    out = []
    for b in bs:
        y = [b[piv[i]] for i in range(n)]
        for i in range(1, n):
            row = LU[i]
            y[i] -= mp.fdot(row[:i], y[:i])
        x = y
        for i in range(n - 1, -1, -1):
            row = LU[i]
            if i + 1 < n:
                x[i] -= mp.fdot(row[i + 1:], x[i + 1:])
            x[i] /= row[i]
        out.append(x)
    return out


def lu_det(A):
    """Determinant by partial-pivoted LU; A is consumed."""
    n = len(A)
    if n == 0:
        return mp.mpf(1)
    LU, _, parity = lu_factor(A)
    det = mp.mpf(parity)
    for i in range(n):
        det *= LU[i][i]
    return det


def principal_minors(A):
    """Leading principal minors [D_1, ..., D_n] via LU without pivoting.

    Requires every leading minor to be nonzero (true for moment matrices of
    a positive weight, and for their once-shifted companions).
    """
    n = len(A)
    minors = []
    det = mp.mpf(1)
    for k in range(n):
        akk = A[k][k]
        if akk == 0:
            raise SingularOperatorError(f"zero pivot at step {k} in minor recursion")
        det *= akk
        minors.append(det)
        inv = 1 / akk
        tail = A[k][k + 1:]
        for i in range(k + 1, n):
            f = A[i][k] * inv
            if f:
                A[i][k + 1:] = [x - f * y for x, y in zip(A[i][k + 1:], tail)]
    return minors


def invert(A, check_rel_tol=None):
    """Dense inverse.  With check_rel_tol set, verifies max|A A^-1 - I|."""
    n = len(A)
    A_orig = [row[:] for row in A] if check_rel_tol is not None else None
    factored = lu_factor([row[:] for row in A])
    cols = lu_solve(factored, [[mp.mpf(1) if i == j else mp.mpf(0) for i in range(n)]
                               for j in range(n)])
    inv = [[cols[j][i] for j in range(n)] for i in range(n)]
    if check_rel_tol is not None:
        resid = mp.mpf(0)
        prod = matmul(A_orig, inv)
        for i in range(n):
            for j in range(n):
                target = 1 if i == j else 0
                resid = max(resid, abs(prod[i][j] - target))
        if resid > check_rel_tol:
            raise SingularOperatorError(
                f"inverse residual {mp.nstr(resid, 5)} exceeds {check_rel_tol}"
            )
    return inv


# ---------------------------------------------------------------------------
# Power-of-two FFT over mpc (batch Fourier coefficients)
# ---------------------------------------------------------------------------

_root_cache: dict = {}


def _fft_roots(n: int, prec: int):
    key = (n, prec)
    cached = _root_cache.get(key)
    if cached is not None:
        return cached
    with mp.workprec(prec):
        roots = [mp.expjpi(mp.mpf(-2 * j) / n) for j in range(n // 2)]
    _root_cache[key] = roots
    return roots


def fft_pow2(values):
    """In-place iterative radix-2 DFT: X_k = sum_j x_j e^{-2 pi i jk/n}.

    Length must be a power of two.  Runs at the ambient mpmath precision.
    """
    a = list(values)
    n = len(a)
    if n & (n - 1):
        raise DomainError("fft length must be a power of two")
    roots = _fft_roots(n, mp.mp.prec)
    j = 0
    for i in range(1, n):
        bit = n >> 1
        while j & bit:
            j ^= bit
            bit >>= 1
        j |= bit
        if i < j:
            a[i], a[j] = a[j], a[i]
    size = 2
    while size <= n:
        half = size >> 1
        step = n // size
        for start in range(0, n, size):
            for i in range(half):
                w = roots[i * step]
                hi = start + i + half
                lo = start + i
                t = w * a[hi]
                u = a[lo]
                a[lo] = u + t
                a[hi] = u - t
        size <<= 1
    return a


def pow2_at_least(n: int) -> int:
    m = 1
    while m < n:
        m <<= 1
    return m


# ---------------------------------------------------------------------------
# Nystrom discretization of Fredholm operators
# ---------------------------------------------------------------------------

@dataclass
class KernelGrid:
    """Quadrature rule plus kernel samples: the Nystrom picture of K.

    ``values[i][j]`` holds K(x_i, x_j).  The symmetrized matrix
    sqrt(w_i) K_ij sqrt(w_j) is what enters determinants and solves.
    """

    rule: QuadratureRule
    values: list
    _factor: object = field(default=None, repr=False, compare=False)

    @classmethod
    def from_kernel(cls, K, rule: QuadratureRule, symmetric: bool = True):
        xs = rule.nodes
        n = len(xs)
        vals = [[mp.mpf(0)] * n for _ in range(n)]
        for i in range(n):
            jstart = i if symmetric else 0
            for j in range(jstart, n):
                v = K(xs[i], xs[j])
                vals[i][j] = v
                if symmetric and j != i:
                    vals[j][i] = v
        return cls(rule=rule, values=vals)

    def symmetrized(self):
        """I - W^{1/2} K W^{1/2} as a fresh row-list matrix."""
        w = self.rule.weights
        n = len(w)
        sw = [mp.sqrt(x) for x in w]
        out = []
        for i in range(n):
            row = self.values[i]
            swi = sw[i]
            new = [-swi * row[j] * sw[j] for j in range(n)]
            new[i] += 1
            out.append(new)
        return out

    def factorized(self):
        if self._factor is None:
            self._factor = lu_factor(self.symmetrized())
        return self._factor

    def trace(self):
        return mp.fsum(w * self.values[i][i]
                       for i, w in enumerate(self.rule.weights))

    def trace_powers(self, pmax: int):
        """[Tr K, Tr K^2, ..., Tr K^pmax] on the grid."""
        w = self.rule.weights
        n = len(w)
        sw = [mp.sqrt(x) for x in w]
        M = [[sw[i] * self.values[i][j] * sw[j] for j in range(n)] for i in range(n)]
        out = []
        P = M
        for _ in range(pmax):
            out.append(mp.fsum(P[i][i] for i in range(n)))
            if len(out) < pmax:
                P = matmul(P, M)
        return out


def fredholm_det_grid(grid: KernelGrid):
    """det(I - W^{1/2} K W^{1/2}) on a fixed Nystrom grid."""
    return lu_det(grid.symmetrized())


def fredholm_det(K, domain, n: int, ctx: PrecisionContext = DEFAULT_CTX,
                 tail_estimate=None):
    """Fredholm determinant det(I - K) of a symmetric trace-class kernel on
    a finite interval, with node doubling until rel_tol agreement.

    ``tail_estimate``, when provided, is the caller's bound on the neglected
    part of a truncated domain; a TruncationWarning fires if it exceeds
    rel_tol.
    """
    a, b = domain
    if tail_estimate is not None and tail_estimate > ctx.rel_tol:
        warnings.warn(
            f"domain truncation tail {tail_estimate} exceeds rel_tol {ctx.rel_tol}",
            TruncationWarning,
        )
    with ctx.workprec():
        if mp.mpf(a) == mp.mpf(b):
            return mp.mpf(1)
        m = max(8, n)
        prev = None
        while True:
            if m > ctx.max_nodes:
                raise NonConvergenceError(
                    f"fredholm_det stalled before {ctx.rel_tol} agreement "
                    f"(budget {ctx.max_nodes} nodes)"
                )
            grid = KernelGrid.from_kernel(K, gauss_legendre(m, a, b, ctx))
            cur = fredholm_det_grid(grid)
            # determinants at the roundoff floor count as converged
            kmax = max((abs(v) for row in grid.values for v in row),
                       default=mp.mpf(0))
            floor = mp.ldexp(max(mp.mpf(1), kmax * (mp.mpf(b) - mp.mpf(a))),
                             -(2 * ctx.bits) // 3)
            if prev is not None and _agree(cur, prev, ctx.rel_tol, floor=floor):
                return cur
            prev = cur
            m *= 2


def fredholm_resolve(grid: KernelGrid, rhs: Sequence,
                     ctx: PrecisionContext = DEFAULT_CTX):
    """Solve (I - K) x = rhs on the Nystrom grid; returns x at the nodes.

    The discretized operator must be safely invertible; the residual
    ||(I-K)x - rhs|| <= rel_tol * ||rhs|| is verified on exit.
    """
    w = grid.rule.weights
    n = len(w)
    if len(rhs) != n:
        raise DomainError("rhs must be sampled on the grid nodes")
    with ctx.workprec():
        sw = [mp.sqrt(x) for x in w]
        b = [sw[i] * rhs[i] for i in range(n)]
        y = lu_solve(grid.factorized(), [b])[0]
        x = [y[i] / sw[i] for i in range(n)]
        # residual in the unsymmetrized formulation
        rhs_norm = max((abs(v) for v in rhs), default=mp.mpf(0))
        resid = mp.mpf(0)
        for i in range(n):
            Kx = mp.fsum(w[j] * grid.values[i][j] * x[j] for j in range(n))
            resid = max(resid, abs(x[i] - Kx - rhs[i]))
        if rhs_norm > 0 and resid > ctx.rel_tol * rhs_norm:
            raise SingularOperatorError(
                f"resolvent residual {mp.nstr(resid, 5)} exceeds "
                f"{ctx.rel_tol} * ||rhs||"
            )
        return x
