"""Bessel functions of the first kind by Miller's downward recurrence.

The driven-oscillator resonance analysis expands the plane-wave
potential in harmonics weighted by J_n(z) with z = 2*eta*sqrt(N*ell),
so only modest orders and |z| < a few tens are ever needed.  The
upward recurrence is unstable for n > |z|; the classic cure is to
recurse downward from a padded start order with arbitrary seed values
and normalize with the identity

    J_0(z) + 2 * sum_{k>=1} J_{2k}(z) = 1.
"""

import math

_Z_MAX = 700.0
_RESCALE = 1e250


def _miller_row(nmax, z):
    """J_0(z)..J_nmax(z) for z > 0 via normalized downward recurrence."""
    start = max(nmax, int(z)) + int(math.sqrt(40.0 * max(nmax, int(z), 1))) + 14
    if start % 2:
        start += 1
    out = [0.0] * (nmax + 1)
    jp = 0.0        # J_{k+1}
    jc = 1e-30      # J_k, arbitrary seed
    total = 0.0     # accumulates J_0 + 2*sum J_{2k}
    for k in range(start, 0, -1):
        jm = (2.0 * k / z) * jc - jp
        jp, jc = jc, jm
        if abs(jc) > _RESCALE:
            jc /= _RESCALE
            jp /= _RESCALE
            total /= _RESCALE
            for i in range(nmax + 1):
                out[i] /= _RESCALE
        if k - 1 <= nmax:
            out[k - 1] = jc
        if (k - 1) % 2 == 0:
            total += jc if k - 1 == 0 else 2.0 * jc
    return [v / total for v in out]


def bessel_j_row(nmax, z):
    """J_0(z)..J_nmax(z); one recurrence pass serves all orders at once."""
    if nmax < 0 or int(nmax) != nmax:
        raise ValueError(f"order must be a nonnegative integer, got {nmax}")
    if abs(z) >= _Z_MAX:
        raise ValueError(f"|z| must be < {_Z_MAX:g}, got {z}")
    if z == 0.0:
        return [1.0] + [0.0] * nmax
    row = _miller_row(int(nmax), abs(z))
    if z < 0.0:
        row = [v if n % 2 == 0 else -v for n, v in enumerate(row)]
    return row


def bessel_j(n, z):
    """Bessel function J_n(z) for integer n >= 0 and |z| < 700."""
    return bessel_j_row(n, z)[n]


def bessel_j_prime(n, z):
    """Derivative J_n'(z) = (J_{n-1}(z) - J_{n+1}(z)) / 2, with J_{-1} = -J_1."""
    row = bessel_j_row(max(n + 1, 1), z)
    jm = -row[1] if n == 0 else row[n - 1]
    return 0.5 * (jm - row[n + 1])


def bessel_j_and_prime(n, z):
    """(J_n(z), J_n'(z)) from a single recurrence pass; used by the flow RHS."""
    row = bessel_j_row(max(n + 1, 1), z)
    jm = -row[1] if n == 0 else row[n - 1]
    return row[n], 0.5 * (jm - row[n + 1])
