"""Independent oracles used by the test suite.

Everything here is deliberately implemented by a different route than
the library code it checks: exact rational arithmetic for the angular
momentum symbols and Bessel series, adaptive/Gauss-Hermite quadrature
for the Lamb-Dicke matrix elements, closed-form first-order
perturbation theory for the early quantum growth.
"""

import math
from fractions import Fraction

import numpy as np
from scipy.integrate import quad


def racah_3j_exact(j1, j2, j3, m1, m2, m3):
    """Wigner 3-j via the Racah sum in exact rational arithmetic.

    Returns sign * sqrt(r1) * r2 evaluated in floating point, with r1
    and r2 exact Fractions.
    """
    two = lambda x: int(round(2 * x))
    tj = (two(j1), two(j2), two(j3))
    tm = (two(m1), two(m2), two(m3))
    if sum(tm) != 0:
        return 0.0
    if any(abs(m) > j for j, m in zip(tj, tm)):
        return 0.0
    if any((j + m) % 2 for j, m in zip(tj, tm)):
        return 0.0
    if tj[2] > tj[0] + tj[1] or tj[2] < abs(tj[0] - tj[1]) or sum(tj) % 2:
        return 0.0
    f = math.factorial
    fh = lambda t: f(t // 2)
    tri = Fraction(
        fh(tj[0] + tj[1] - tj[2]) * fh(tj[0] - tj[1] + tj[2]) * fh(-tj[0] + tj[1] + tj[2]),
        fh(tj[0] + tj[1] + tj[2] + 2),
    )
    pm = Fraction(
        fh(tj[0] + tm[0]) * fh(tj[0] - tm[0])
        * fh(tj[1] + tm[1]) * fh(tj[1] - tm[1])
        * fh(tj[2] + tm[2]) * fh(tj[2] - tm[2])
    )
    k_min = max(0, (tj[1] - tj[2] - tm[0]) // 2, (tj[0] - tj[2] + tm[1]) // 2)
    k_max = min((tj[0] + tj[1] - tj[2]) // 2, (tj[0] - tm[0]) // 2, (tj[1] + tm[1]) // 2)
    total = Fraction(0)
    for k in range(k_min, k_max + 1):
        denom = (
            f(k)
            * fh(tj[0] + tj[1] - tj[2] - 2 * k)
            * fh(tj[0] - tm[0] - 2 * k)
            * fh(tj[1] + tm[1] - 2 * k)
            * fh(tj[2] - tj[1] + tm[0] + 2 * k)
            * fh(tj[2] - tj[0] - tm[1] + 2 * k)
        )
        total += Fraction((-1) ** k, denom)
    sign = (-1) ** ((tj[0] - tj[1] - tm[2]) // 2)
    return sign * math.sqrt(float(tri * pm)) * float(total)


def bessel_series_exact(n, z, terms=120):
    """J_n(z) by the alternating power series in exact rationals.

    Safe for |z| <= 30 or so, where floating-point summation of the
    series would lose everything to cancellation.
    """
    zf = Fraction(z)
    half = zf / 2
    total = Fraction(0)
    for k in range(terms):
        num = (-1) ** k * half ** (n + 2 * k)
        total += Fraction(num, math.factorial(k) * math.factorial(n + k))
    return float(total)


def hermite_functions(n_max, u):
    """Orthonormal oscillator eigenfunctions psi_0..psi_n_max at scalar u.

    Stable recurrence; psi_n(u) = H_n(u) e^{-u^2/2} / sqrt(2^n n! sqrt(pi)).
    """
    out = [0.0] * (n_max + 1)
    h_prev = 0.0
    h = math.pi ** -0.25 * math.exp(-0.5 * u * u)
    out[0] = h
    for n in range(n_max):
        h_next = u * math.sqrt(2.0 / (n + 1)) * h - math.sqrt(n / (n + 1.0)) * h_prev
        h_prev, h = h, h_next
        out[n + 1] = h
    return out


def matrix_element_quad(m, n, eta):
    """<m| e^{i xi} |n> by adaptive quadrature over the eigenfunction product.

    With u = xi / (sqrt(2) eta) the integral is
    int psi_m(u) psi_n(u) e^{i sqrt(2) eta u} du.
    """
    k = math.sqrt(2.0) * eta
    top = max(m, n)
    lim = math.sqrt(2.0 * top + 1.0) + 12.0

    def re(u):
        psi = hermite_functions(top, u)
        return psi[m] * psi[n] * math.cos(k * u)

    def im(u):
        psi = hermite_functions(top, u)
        return psi[m] * psi[n] * math.sin(k * u)

    kwargs = dict(epsabs=1e-13, epsrel=1e-13, limit=300)
    re_val = quad(re, -lim, lim, **kwargs)[0]
    im_val = quad(im, -lim, lim, **kwargs)[0]
    return complex(re_val, im_val)


def matrix_element_gh(n_max, eta, points=160):
    """Full (n_max+1)^2 matrix of <m|e^{i xi}|n> by Gauss-Hermite quadrature."""
    x, w = np.polynomial.hermite.hermgauss(points)
    # Orthonormal Hermite polynomials against weight e^{-u^2}.
    h = np.zeros((n_max + 1, points))
    h[0] = math.pi ** -0.25
    if n_max >= 1:
        h[1] = math.sqrt(2.0) * x * h[0]
    for n in range(1, n_max):
        h[n + 1] = x * math.sqrt(2.0 / (n + 1)) * h[n] - math.sqrt(n / (n + 1.0)) * h[n - 1]
    kern = w * np.exp(1j * math.sqrt(2.0) * eta * x)
    return (h * kern) @ h.T


def xi2_quad(amplitudes, eta):
    """<xi^2> of a small state by quadrature over the reconstructed wave function."""
    amps = np.asarray(amplitudes, dtype=complex)
    top = len(amps) - 1
    lim = math.sqrt(2.0 * top + 1.0) + 12.0

    def density_xi2(u):
        psi = hermite_functions(top, u)
        val = sum(c * psi[k] for k, c in enumerate(amps))
        xi = math.sqrt(2.0) * eta * u
        return abs(val) ** 2 * xi**2

    # |Psi(xi)|^2 dxi = |psi(u)|^2 du under xi = sqrt(2) eta u.
    return quad(density_xi2, -lim, lim, epsabs=1e-12, epsrel=1e-12, limit=300)[0]


def tdpt_p1(epsilon, eta, mu, tau):
    """First-order perturbation theory for P_1 from the ground state.

    b_1(tau) = -i (eps g / 2 eta^2) int_0^tau sin(mu s) e^{i s} ds with
    g = |<1| e^{i xi} |0>| = eta e^{-eta^2/2}; the integral is done in
    closed form.
    """
    g = eta * math.exp(-0.5 * eta**2)

    def osc(a):
        # int_0^tau e^{i a s} ds
        if a == 0:
            return complex(tau, 0.0)
        return (np.exp(1j * a * tau) - 1.0) / (1j * a)

    integral = (osc(1.0 + mu) - osc(1.0 - mu)) / 2j
    b1 = -1j * (epsilon * g / (2.0 * eta**2)) * integral
    return abs(b1) ** 2
