"""Independent series/product oracles used to freeze expected test values.

Everything here is deliberately primitive (term recurrences, Euler products,
Richardson tables) and shares no code with the library paths under test.
"""

import mpmath as mp


def bessel_j_series(n: int, t) -> mp.mpf:
    """Classical J_n(t) by its ascending series, summed to the machine tail."""
    n = int(n)
    t = mp.mpf(t)
    if n < 0:
        return (-1) ** (-n) * bessel_j_series(-n, t)
    half = t / 2
    term = half ** n / mp.factorial(n)
    total = term
    k = 0
    q = -half * half
    while True:
        k += 1
        term *= q / (k * (k + n))
        total += term
        if abs(term) < abs(total) * mp.eps or abs(term) < mp.mpf(10) ** (-mp.mp.dps - 10):
            return total


def bessel_i_series(n: int, t) -> mp.mpf:
    """Modified Bessel I_n(t) by its ascending series."""
    n = abs(int(n))
    t = mp.mpf(t)
    half = t / 2
    term = half ** n / mp.factorial(n)
    total = term
    k = 0
    q = half * half
    while True:
        k += 1
        term *= q / (k * (k + n))
        total += term
        if term < total * mp.eps:
            return total


_gamma_cache = {}


def gamma_product(z, n0: int = 512, levels: int = 10) -> mp.mpf:
    """Gamma(z) by the Euler limit n^z n!/(z(z+1)...(z+n)), accelerated with
    a Richardson table in 1/n.  Good to ~1e-27 with the defaults."""
    z = mp.mpf(z)
    key = (z, n0, levels, mp.mp.prec)
    if key in _gamma_cache:
        return _gamma_cache[key]
    table = []
    for j in range(levels):
        n = n0 << j
        g = mp.power(n, z) / z
        for k in range(1, n + 1):
            g *= k / (z + k)
        row = [g]
        for i in range(1, j + 1):
            w = mp.mpf(2) ** i
            row.append((w * row[i - 1] - table[j - 1][i - 1]) / (w - 1))
        table.append(row)
    _gamma_cache[key] = table[-1][-1]
    return table[-1][-1]


def _airy_fg_terms(s):
    """Coefficient terms of the two ODE solutions of y'' = s y.

    Yields (a_k s^{3k}, b_k s^{3k+1}, k) with a_0 = b_0 = 1,
    a_{k+1} = a_k / ((3k+2)(3k+3)), b_{k+1} = b_k / ((3k+3)(3k+4)).
    """
    s = mp.mpf(s)
    s3 = s ** 3
    tf = mp.mpf(1)
    tg = s
    k = 0
    while True:
        yield tf, tg, k
        tf *= s3 / ((3 * k + 2) * (3 * k + 3))
        tg *= s3 / ((3 * k + 3) * (3 * k + 4))
        k += 1


def airy_constants():
    g13 = gamma_product(mp.mpf(1) / 3)
    g23 = gamma_product(mp.mpf(2) / 3)
    ai0 = mp.power(3, mp.mpf(-2) / 3) / g23
    aip0 = -mp.power(3, mp.mpf(-1) / 3) / g13
    return ai0, aip0


def airy_maclaurin(s) -> mp.mpf:
    """Ai(s) from the Maclaurin series.

    Trustworthy for |s| <= ~8: beyond that, cancellation meets the finite
    accuracy of the gamma-product constants.
    """
    ai0, aip0 = airy_constants()
    f = mp.mpf(0)
    g = mp.mpf(0)
    for tf, tg, k in _airy_fg_terms(s):
        f += tf
        g += tg
        if max(abs(tf), abs(tg)) < mp.eps * max(abs(f), abs(g), mp.mpf(1)) and k > 2:
            break
    return ai0 * f + aip0 * g


def airy_prime_maclaurin(s) -> mp.mpf:
    s = mp.mpf(s)
    ai0, aip0 = airy_constants()
    fp = mp.mpf(0)
    gp = mp.mpf(0)
    for tf, tg, k in _airy_fg_terms(s):
        # d/ds of a_k s^{3k} is 3k a_k s^{3k-1}; of b_k s^{3k+1} is (3k+1) b_k s^{3k}
        if k > 0:
            fp += 3 * k * tf / s if s != 0 else mp.mpf(0)
        gp += (3 * k + 1) * (tg / s if s != 0 else (mp.mpf(1) if k == 0 else mp.mpf(0)))
        if max(abs(tf), abs(tg)) < mp.eps * max(abs(fp), abs(gp), mp.mpf(1)) and k > 2:
            break
    return ai0 * fp + aip0 * gp


def poly_eval(coeffs, x):
    acc = mp.mpf(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def poly_integral(coeffs, a, b):
    """Exact integral of a polynomial given by coefficients c_0 + c_1 x + ..."""
    acc = mp.mpf(0)
    for k, c in enumerate(coeffs):
        acc += c * (mp.mpf(b) ** (k + 1) - mp.mpf(a) ** (k + 1)) / (k + 1)
    return acc
