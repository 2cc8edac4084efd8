import mpmath as mp
import pytest
from hypothesis import given, settings, strategies as st

from tacfermi.errors import (
    BudgetExceededError,
    DomainError,
    SingularOperatorError,
)
from tacfermi.numerics import (
    KernelGrid,
    PrecisionContext,
    fft_pow2,
    fredholm_det,
    fredholm_det_grid,
    fredholm_resolve,
    gauss_legendre,
    lu_det,
    periodic_trapezoid,
    principal_minors,
)

from oracles import bessel_i_series, poly_eval, poly_integral


class TestPeriodicTrapezoid:
    def test_constant(self, ctx256):
        assert periodic_trapezoid(lambda k: mp.mpf(1), 16, ctx256) == 1

    def test_zero_mean_harmonic(self, ctx256):
        val = periodic_trapezoid(mp.cos, 16, ctx256)
        assert abs(val) < mp.mpf(10) ** -60

    def test_exp_cos_moment(self, ctx256):
        # (1/2pi) int e^{2 cos k} dk = I_0(2) = 2.2795853023...
        val = periodic_trapezoid(lambda k: mp.exp(2 * mp.cos(k)), 16, ctx256)
        oracle = bessel_i_series(0, 2)
        assert abs(val - oracle) < ctx256.rel_tol * oracle
        assert mp.nstr(val, 11) == "2.2795853023"
        # geometric convergence: a tighter tolerance is actually reached
        tight = PrecisionContext(bits=256, rel_tol=1e-40)
        val = periodic_trapezoid(lambda k: mp.exp(2 * mp.cos(k)), 16, tight)
        assert abs(val - oracle) < mp.mpf(10) ** -40

    def test_budget_error(self):
        ctx = PrecisionContext(bits=256, rel_tol=1e-40, max_nodes=16)
        with pytest.raises(BudgetExceededError):
            periodic_trapezoid(lambda k: mp.exp(40 * mp.cos(k)), 8, ctx)

    def test_deterministic(self, ctx256):
        f = lambda k: mp.exp(mp.cos(k) + mp.mpf("0.125") * mp.cos(2 * k))
        a = periodic_trapezoid(f, 16, ctx256)
        b = periodic_trapezoid(f, 16, ctx256)
        assert a == b and mp.nstr(a, 50) == mp.nstr(b, 50)


class TestGaussLegendre:
    def test_midpoint(self, ctx256):
        rule = gauss_legendre(1, 0, 1, ctx256)
        assert len(rule.nodes) == 1
        assert abs(rule.nodes[0] - mp.mpf("0.5")) < mp.mpf(10) ** -70
        assert abs(rule.weights[0] - 1) < mp.mpf(10) ** -70

    def test_degree3_exact(self, ctx256):
        rule = gauss_legendre(2, 0, 1, ctx256)
        val = rule.integrate(lambda x: x * x)
        assert abs(val - mp.mpf(1) / 3) < mp.mpf(10) ** -70

    def test_symmetric_nodes(self, ctx256):
        rule = gauss_legendre(7, -1, 1, ctx256)
        for x, y in zip(rule.nodes, reversed(rule.nodes)):
            assert abs(x + y) < mp.mpf(10) ** -70

    def test_weights_sum(self, ctx256):
        rule = gauss_legendre(13, -2, 5, ctx256)
        assert abs(mp.fsum(rule.weights) - 7) < mp.mpf(10) ** -70

    def test_degenerate_interval(self, ctx256):
        rule = gauss_legendre(4, 3, 3, ctx256)
        assert rule.integrate(lambda x: x ** 2 + 1) == 0

    def test_bad_interval(self, ctx256):
        with pytest.raises(DomainError):
            gauss_legendre(4, 1, 0, ctx256)

    @settings(max_examples=20, deadline=None)
    @given(
        n=st.integers(min_value=1, max_value=9),
        coeffs=st.lists(st.integers(min_value=-9, max_value=9), min_size=1, max_size=8),
    )
    def test_polynomial_exactness(self, n, coeffs):
        # degree <= 2n-1 integrates exactly
        coeffs = coeffs[: 2 * n]
        rule = gauss_legendre(n, -1, 2)
        got = rule.integrate(lambda x: poly_eval(coeffs, x))
        want = poly_integral(coeffs, -1, 2)
        assert abs(got - want) < mp.mpf(10) ** -60


def _cd_airy_kernel(x, y, sigma):
    # Christoffel-Darboux form of the shifted Airy kernel; mp.airyai is fine
    # here since only the Nystrom plumbing is under test.
    a = x + sigma
    b = y + sigma
    if a == b:
        return mp.airyai(a, derivative=1) ** 2 - a * mp.airyai(a) ** 2
    num = (mp.airyai(a) * mp.airyai(b, derivative=1)
           - mp.airyai(a, derivative=1) * mp.airyai(b))
    return num / (a - b)


class TestFredholmDet:
    def test_zero_kernel(self, ctx256):
        val = fredholm_det(lambda x, y: mp.mpf(0), (0, 5), 16, ctx256)
        assert val == 1

    def test_rank_one_exponential(self, ctx256):
        # K(x,y) = e^{-x} e^{-y} on [0, 40]: det = 1 - int u^2 = 1/2 + tail
        val = fredholm_det(lambda x, y: mp.exp(-x - y), (0, 40), 32, ctx256)
        want = 1 - (1 - mp.exp(-80)) / 2
        assert abs(val - want) < 1e-10

    def test_far_shifted_airy_is_one(self, ctx256):
        val = fredholm_det(lambda x, y: _cd_airy_kernel(x, y, 8), (0, 10), 12, ctx256)
        assert abs(val - 1) < 1e-6
        grid = KernelGrid.from_kernel(lambda x, y: _cd_airy_kernel(x, y, 8),
                                      gauss_legendre(16, 0, 10, ctx256))
        assert grid.trace() < 1e-7

    @settings(max_examples=10, deadline=None)
    @given(coeffs=st.lists(st.integers(min_value=-3, max_value=3), min_size=1, max_size=4))
    def test_rank_one_polynomial(self, coeffs):
        ctx = PrecisionContext(bits=256)
        u = lambda x: poly_eval(coeffs, x)
        val = fredholm_det(lambda x, y: u(x) * u(y), (0, 1), 16, ctx)
        sq = [mp.mpf(0)] * (2 * len(coeffs) - 1)
        for i, a in enumerate(coeffs):
            for j, b in enumerate(coeffs):
                sq[i + j] += mp.mpf(a) * b
        want = 1 - poly_integral(sq, 0, 1)
        assert abs(val - want) < 1e-20

    def test_trace_expansion(self, ctx256):
        # log det(1-K) = -sum_p Tr(K^p)/p for ||K|| < 1, on the same grid
        K = lambda x, y: mp.mpf("0.4") * mp.exp(-(x - y) ** 2 - x - y)
        grid = KernelGrid.from_kernel(K, gauss_legendre(24, 0, 3, ctx256))
        logdet = mp.log(fredholm_det_grid(grid))
        traces = grid.trace_powers(60)
        series = -mp.fsum(t / (p + 1) for p, t in enumerate(traces))
        assert abs(logdet - series) < 1e-9

    def test_determinism(self, ctx256):
        K = lambda x, y: mp.exp(-x - y)
        a = fredholm_det(K, (0, 10), 16, ctx256)
        b = fredholm_det(K, (0, 10), 16, ctx256)
        assert a == b


class TestFredholmResolve:
    def test_identity(self, ctx256):
        grid = KernelGrid.from_kernel(lambda x, y: mp.mpf(0),
                                      gauss_legendre(12, 0, 2, ctx256))
        rhs = [mp.sin(x) for x in grid.rule.nodes]
        out = fredholm_resolve(grid, rhs, ctx256)
        for a, b in zip(out, rhs):
            assert abs(a - b) < mp.mpf(10) ** -70

    def test_sherman_morrison(self, ctx256):
        # K = u u^T with c = int u^2 < 1: (I-K)^{-1} u = u / (1-c)
        grid = KernelGrid.from_kernel(lambda x, y: mp.exp(-x - y),
                                      gauss_legendre(48, 0, 40, ctx256))
        u = [mp.exp(-x) for x in grid.rule.nodes]
        out = fredholm_resolve(grid, u, ctx256)
        c = (1 - mp.exp(-80)) / 2
        for a, b in zip(out, u):
            assert abs(a - b / (1 - c)) < 1e-12

    def test_shifted_airy_resolvent_trivial_far_out(self, ctx256):
        grid = KernelGrid.from_kernel(lambda x, y: _cd_airy_kernel(x, y, 9),
                                      gauss_legendre(24, 0, 12, ctx256))
        rhs = [mp.exp(-x) for x in grid.rule.nodes]
        out = fredholm_resolve(grid, rhs, ctx256)
        for a, b in zip(out, rhs):
            assert abs(a - b) < 1e-7

    def test_singular_operator(self, ctx256):
        # u with int u^2 = 1 exactly on the grid: I - uu^T is singular
        grid = KernelGrid.from_kernel(lambda x, y: 3 * x * y,
                                      gauss_legendre(8, 0, 1, ctx256))
        rhs = [mp.sqrt(3) * x for x in grid.rule.nodes]
        with pytest.raises(SingularOperatorError):
            fredholm_resolve(grid, rhs, ctx256)


class TestLinalg:
    def test_lu_det_small(self):
        A = [[mp.mpf(2), mp.mpf(1)], [mp.mpf(1), mp.mpf(3)]]
        assert abs(lu_det(A) - 5) < mp.mpf(10) ** -70

    def test_principal_minors_match_dets(self):
        import random

        rng = random.Random(7)
        n = 6
        B = [[mp.mpf(rng.randint(-4, 4)) for _ in range(n)] for _ in range(n)]
        # SPD matrix: B^T B + I has safely nonzero leading minors
        A = [[mp.fsum(B[k][i] * B[k][j] for k in range(n)) + (i == j)
              for j in range(n)] for i in range(n)]
        minors = principal_minors([row[:] for row in A])
        for size in range(1, n + 1):
            direct = lu_det([row[:size] for row in A[:size]])
            assert abs(minors[size - 1] - direct) < 1e-50 * abs(direct)

    def test_fft_matches_direct_dft(self):
        import random

        rng = random.Random(3)
        n = 32
        xs = [mp.mpc(rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(n)]
        got = fft_pow2(xs)
        for k in (0, 1, 7, 19, 31):
            want = mp.fsum(x * mp.expjpi(mp.mpf(-2 * j * k) / n)
                           for j, x in enumerate(xs))
            assert abs(got[k] - want) < mp.mpf(10) ** -150
