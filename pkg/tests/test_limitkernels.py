import mpmath as mp
import numpy as np
import pytest

from tacfermi.errors import DomainError
from tacfermi.numerics import (
    KernelGrid,
    PrecisionContext,
    fredholm_resolve,
    gauss_legendre,
)
from tacfermi.limitkernels import (
    AiryFamily,
    TacnodeParams,
    _airy_kernel_grid,
    a_function,
    airy_kernel,
    airy_kernel_cd,
    kernel_table,
    tacnode_kernel,
    tw_distribution,
)

CTX = PrecisionContext(bits=192)


class TestAiryKernel:
    def test_matches_cd_form(self):
        for s, sp in ((0.0, 0.0), (0.3, -0.7), (-1.5, 2.0)):
            v = airy_kernel(s, sp, AiryFamily(m=1, sigma=0.0), CTX)
            assert abs(v - airy_kernel_cd(s, sp)) < 1e-10

    def test_symmetry(self):
        fam = AiryFamily(m=1, sigma=0.0)
        a = airy_kernel(0.3, -0.7, fam, CTX)
        b = airy_kernel(-0.7, 0.3, fam, CTX)
        assert abs(a - b) < 1e-14

    def test_far_shift_vanishes(self):
        fam = AiryFamily(m=1, sigma=10.0)
        for s, sp in ((-2.0, -2.0), (0.0, 2.0), (2.0, 2.0)):
            assert abs(airy_kernel(s, sp, fam, CTX)) < 1e-8

    def test_positive_semidefinite_grid(self):
        for q, sig in ((3, 0.0), (5, 0.0), (3, -1.0)):
            grid = _airy_kernel_grid(q, sig, 32, 16.0, CTX)
            w = [mp.sqrt(x) for x in grid.rule.weights]
            M = np.array([[float(w[i] * grid.values[i][j] * w[j])
                           for j in range(32)] for i in range(32)])
            eig = np.linalg.eigvalsh(M)
            assert eig.min() > -1e-10
            assert eig.max() < 1 + 1e-10

    def test_order_validation(self):
        with pytest.raises(DomainError):
            AiryFamily(m=0, sigma=0.0)


class TestTracyWidom:
    def test_known_value_at_zero(self):
        # canonical edge-law value F(0) = 0.9693728...
        f = tw_distribution(0.0, 1, CTX)
        assert abs(f - mp.mpf("0.9693728")) < 5e-7

    def test_monotone_in_sigma(self):
        f0 = tw_distribution(0.0, 1, CTX)
        f2 = tw_distribution(2.0, 1, CTX)
        f4 = tw_distribution(4.0, 1, CTX)
        assert f0 < f2 < f4 < 1 + 1e-12

    def test_far_shift_tends_to_one(self):
        assert abs(tw_distribution(8.0, 1, CTX) - 1) < 1e-6

    def test_higher_order_in_unit_interval(self):
        f = tw_distribution(0.0, 2, CTX)
        assert 0.5 < f < 1.0

    def test_bad_order(self):
        with pytest.raises(DomainError):
            tw_distribution(0.0, 3, CTX)


class TestAFunction:
    def test_far_shift_vanishes(self):
        p = TacnodeParams(m=1, sigma=9.0)
        assert abs(a_function(0.0, 0.0, p, CTX)) < 1e-7

    def test_resolution_consistency(self):
        for m in (1, 2):
            p = TacnodeParams(m=m, sigma=0.0)
            a = a_function(0.0, 0.0, p, CTX, n=48)
            b = a_function(0.0, 0.0, p, CTX, n=96)
            assert abs(a - b) < 1e-8

    def test_negative_u_rejected(self):
        with pytest.raises(DomainError):
            a_function(0.0, -1.0, TacnodeParams(m=1, sigma=0.0), CTX)


def _naive_tacnode_m1(s, sp, sigma, n, cutoff, ctx):
    """Literal transliteration of the order-one kernel with hard-coded
    constants and mp.airyai, sharing only the quadrature rules."""
    s = mp.mpf(s)
    sp = mp.mpf(sp)
    sigma = mp.mpf(sigma)
    c1 = mp.cbrt(2)
    c2 = mp.cbrt(4)
    rule = gauss_legendre(n, 0, cutoff, ctx)
    first = mp.fsum(w * mp.airyai(u + sigma - s) * mp.airyai(u + sigma - sp)
                    for u, w in zip(rule.nodes, rule.weights))
    shift = c2 * sigma
    V = [[mp.airyai(x + shift + v) for v in rule.nodes] for x in rule.nodes]
    m = len(rule.nodes)
    K = [[mp.fsum(V[i][k] * rule.weights[k] * V[j][k] for k in range(m))
          for j in range(m)] for i in range(m)]
    grid = KernelGrid(rule=rule, values=K)

    def avec(t):
        out = []
        for u in rule.nodes:
            inner = mp.fsum(w * mp.airyai(u + v + shift)
                            * mp.airyai(-t + c1 * v + sigma)
                            for v, w in zip(rule.nodes, rule.weights))
            out.append(mp.airyai(t + c1 * u + sigma) - inner)
        return out

    resolved = fredholm_resolve(grid, avec(sp), ctx)
    quad = mp.fsum(w * a * r
                   for w, a, r in zip(rule.weights, avec(s), resolved))
    return first + c1 * quad


class TestTacnode:
    def test_symmetries(self):
        p = TacnodeParams(m=1, sigma=0.0)
        a = tacnode_kernel(0.5, -1.2, p, CTX)
        b = tacnode_kernel(-1.2, 0.5, p, CTX)
        c = tacnode_kernel(-0.5, 1.2, p, CTX)
        assert abs(a - b) < 1e-8
        assert abs(a - c) < 1e-8

    def test_decoupling_at_large_sigma(self):
        p = TacnodeParams(m=1, sigma=6.0)
        for s, sp in ((-2.0, -1.0), (0.0, 0.0), (2.0, 1.5)):
            kt = tacnode_kernel(s, sp, p, CTX)
            two = airy_kernel_cd(6 - s, 6 - sp) + airy_kernel_cd(6 + s, 6 + sp)
            assert abs(kt - two) < 1e-4

    def test_diagonal_nonnegative(self):
        p = TacnodeParams(m=1, sigma=0.0)
        for s in (-3.0, -1.0, 0.0, 1.0, 3.0):
            assert tacnode_kernel(s, s, p, CTX) > -1e-10

    def test_generic_formula_degenerates_to_m1(self):
        p = TacnodeParams(m=1, sigma=0.5)
        for s, sp in ((0.0, 0.0), (0.8, -0.4)):
            generic = tacnode_kernel(s, sp, p, CTX, n=32, cutoff=12.0)
            literal = _naive_tacnode_m1(s, sp, 0.5, 32, 12.0, CTX)
            assert abs(generic - literal) < 1e-10

    def test_kernel_table_matches_scalar(self):
        # the table batches the decoupled term over the grid, so the two
        # paths share rules but not bit patterns
        p = TacnodeParams(m=2, sigma=0.0)
        vals, meta = kernel_table(p, (0.0,), CTX, n=32, cutoff=12.0)
        single = tacnode_kernel(0.0, 0.0, p, CTX, n=32, cutoff=12.0)
        assert abs(vals[0][0] - single) < 1e-12
        assert meta["m"] == 2

    def test_resolvent_identity_on_grid(self):
        # (1 - K) applied to the resolved vector recovers A_s
        from tacfermi.limitkernels import _tac_workspace

        p = TacnodeParams(m=1, sigma=0.0)
        ws = _tac_workspace(p, CTX, 32, 12.0)
        av = ws.a_vector(mp.mpf("0.3"))
        rv = ws.resolved(mp.mpf("0.3"))
        w = ws.grid.rule.weights
        for i in range(len(av)):
            recon = rv[i] - mp.fsum(
                w[j] * ws.grid.values[i][j] * rv[j] for j in range(len(av))
            )
            assert abs(recon - av[i]) < 1e-12

    def test_order_validation(self):
        with pytest.raises(DomainError):
            TacnodeParams(m=3, sigma=0.0)
