"""Reduction of two detuned laser beams on a two-level alkali-like ion.

Far off resonance, the upper manifold can be eliminated and the beams
act on the two ground sublevels through an effective operator
h0*I + h1*s1 + h2*s2 + h3*s3 built from quadratic field combinations.
For an S_1/2 lower and P_1/2 upper manifold the angular-momentum
algebra collapses to four closed-form 3x3 tensors; for Z-polarized
beams only the scalar light shift h0 survives and the two-beam
interference leaves a travelling standing-wave potential.

All coupling coefficients are returned in units of the single-ion
light-shift scale chi = A*pi*eps0 / (4 k0^3 Delta); multiply by
:func:`chi_factor` for Joules.
"""

from dataclasses import dataclass
import math

import numpy as np

from .constants import EPS0

# Normalized spherical basis vectors e^(q), q = +1, 0, -1, in the
# internal-state (X, Y, Z) frame.
SPHERICAL_BASIS = {
    1: np.array([-1.0, 1.0j, 0.0]) / math.sqrt(2.0),
    0: np.array([0.0, 0.0, 1.0]),
    -1: np.array([1.0, 1.0j, 0.0]) / math.sqrt(2.0),
}

# Magnetic quantum numbers of the two lower-manifold states |1>, |2>
# (m = -1/2, +1/2 of S_1/2) and the shared J of both manifolds.
_M_LOWER = {1: -0.5, 2: 0.5}
_J_LOWER = 0.5
_J_UPPER = 0.5


def _two(x):
    """Twice a half-integer as an exact int, or None if x is neither."""
    t = 2.0 * x
    r = round(t)
    if abs(t - r) > 1e-9:
        return None
    return int(r)


def wigner_3j(j1, j2, j3, m1, m2, m3):
    """Wigner 3-j symbol by the Racah closed formula.

    Selection-rule violations (triangle inequality, m-sum, projection
    range, integer/half-integer mismatch) return 0 by convention.  The
    factorials are exact integers; only the final square root and sum
    are floating point, which is ample for the small j used here.
    """
    tj1, tj2, tj3 = _two(j1), _two(j2), _two(j3)
    tm1, tm2, tm3 = _two(m1), _two(m2), _two(m3)
    if None in (tj1, tj2, tj3, tm1, tm2, tm3):
        return 0.0
    if tm1 + tm2 + tm3 != 0:
        return 0.0
    if tj1 < 0 or tj2 < 0 or tj3 < 0:
        return 0.0
    if abs(tm1) > tj1 or abs(tm2) > tj2 or abs(tm3) > tj3:
        return 0.0
    # (j + m) must be integral for each column.
    if (tj1 + tm1) % 2 or (tj2 + tm2) % 2 or (tj3 + tm3) % 2:
        return 0.0
    # Triangle inequality with integral perimeter.
    if tj3 > tj1 + tj2 or tj3 < abs(tj1 - tj2) or (tj1 + tj2 + tj3) % 2:
        return 0.0

    f = math.factorial
    # All arguments below are guaranteed integral; work in doubled units.
    def fh(t):
        return f(t // 2)

    tri = (
        fh(tj1 + tj2 - tj3) * fh(tj1 - tj2 + tj3) * fh(-tj1 + tj2 + tj3)
        / fh(tj1 + tj2 + tj3 + 2)
    )
    pm = (
        fh(tj1 + tm1) * fh(tj1 - tm1)
        * fh(tj2 + tm2) * fh(tj2 - tm2)
        * fh(tj3 + tm3) * fh(tj3 - tm3)
    )

    k_min = max(0, (tj2 - tj3 - tm1) // 2, (tj1 - tj3 + tm2) // 2)
    k_max = min(
        (tj1 + tj2 - tj3) // 2,
        (tj1 - tm1) // 2,
        (tj2 + tm2) // 2,
    )
    total = 0.0
    for k in range(k_min, k_max + 1):
        denom = (
            f(k)
            * fh(tj1 + tj2 - tj3 - 2 * k)
            * fh(tj1 - tm1 - 2 * k)
            * fh(tj2 + tm2 - 2 * k)
            * fh(tj3 - tj2 + tm1 + 2 * k)
            * fh(tj3 - tj1 - tm2 + 2 * k)
        )
        total += (-1.0) ** k / denom
    sign = (-1.0) ** ((tj1 - tj2 - tm3) // 2)
    return sign * math.sqrt(tri * pm) * total


def lambda_tensor(mu_state, nu_state):
    """Closed-form coupling tensor Lambda(mu, nu) for the S_1/2 <-> P_1/2 reduction.

    States are labelled 1 (m = -1/2) and 2 (m = +1/2).  Satisfies
    Lambda(1,1) = Lambda(2,2)* and Lambda(1,2) = -Lambda(2,1)*.
    """
    _check_state(mu_state)
    _check_state(nu_state)
    l11 = np.array(
        [[1.0, -1.0j, 0.0], [1.0j, 1.0, 0.0], [0.0, 0.0, 1.0]]
    ) / 3.0
    l12 = np.array(
        [[0.0, 0.0, -1.0], [0.0, 0.0, -1.0j], [1.0, 1.0j, 0.0]]
    ) / 3.0
    if (mu_state, nu_state) == (1, 1):
        return l11
    if (mu_state, nu_state) == (2, 2):
        return np.conj(l11)
    if (mu_state, nu_state) == (1, 2):
        return l12
    return -np.conj(l12)


def lambda_tensor_from_3j(mu_state, nu_state):
    """Lambda(mu, nu) by the brute-force double sum over (m_lambda, q, q').

    Independent of :func:`lambda_tensor`; the two must agree elementwise,
    which is this module's central oracle check.
    """
    _check_state(mu_state)
    _check_state(nu_state)
    m_mu = _M_LOWER[mu_state]
    m_nu = _M_LOWER[nu_state]
    out = np.zeros((3, 3), dtype=complex)
    degeneracy = 2.0 * _J_UPPER + 1.0
    for twice_ml in (-1, 1):
        m_l = twice_ml / 2.0
        for q, eq in SPHERICAL_BASIS.items():
            w1 = wigner_3j(_J_LOWER, 1, _J_UPPER, -m_mu, q, m_l)
            if w1 == 0.0:
                continue
            for qp, eqp in SPHERICAL_BASIS.items():
                w2 = wigner_3j(_J_LOWER, 1, _J_UPPER, -m_nu, qp, m_l)
                if w2 == 0.0:
                    continue
                out += degeneracy * w1 * w2 * np.outer(eq, np.conj(eqp))
    return out


def _check_state(s):
    if s not in (1, 2):
        raise ValueError(f"state label must be 1 or 2, got {s}")


@dataclass(frozen=True)
class ComplexFieldVector:
    """Complex electric-field components in the quantization (X, Y, Z) frame, V/m."""

    E_X: complex
    E_Y: complex
    E_Z: complex

    def __post_init__(self):
        for name in ("E_X", "E_Y", "E_Z"):
            v = complex(getattr(self, name))
            if not (math.isfinite(v.real) and math.isfinite(v.imag)):
                raise ValueError(f"{name} must be finite, got {v}")

    def as_array(self):
        return np.array([self.E_X, self.E_Y, self.E_Z], dtype=complex)


@dataclass(frozen=True)
class CouplingCoefficients:
    """Pauli decomposition (h0, h1, h2, h3) of the effective coupling, chi units."""

    h0: float
    h1: float
    h2: float
    h3: float


def coupling_h(fields: ComplexFieldVector) -> CouplingCoefficients:
    """Coupling coefficients of the two-level reduction, in units of chi.

    h0 is the polarization-independent light shift, h3 the differential
    Stark shift, h1/h2 drive transitions between the sublevels.  For
    Z-polarized fields h1 = h2 = h3 = 0.
    """
    ex, ey, ez = fields.E_X, fields.E_Y, fields.E_Z
    h0 = -(abs(ex) ** 2 + abs(ey) ** 2 + abs(ez) ** 2)
    h1 = 2.0 * (ez * ey.conjugate()).imag
    h2 = 2.0 * (ex * ez.conjugate()).imag
    h3 = 2.0 * (ex * ey.conjugate()).imag
    return CouplingCoefficients(h0=h0, h1=h1, h2=h2, h3=h3)


def kappa_matrix(fields: ComplexFieldVector) -> np.ndarray:
    """2x2 lower-manifold coupling matrix kappa, chi units, via the Lambda tensors.

    kappa(mu,nu) = -3 * sum_ij Lambda_ij(mu,nu) E_i E_j*; Hermitian for
    any field configuration.  Recombining its entries reproduces
    :func:`coupling_h`, which provides an independent route to the
    coefficients.
    """
    e = fields.as_array()
    quad = np.outer(e, np.conj(e))
    kappa = np.zeros((2, 2), dtype=complex)
    for mu in (1, 2):
        for nu in (1, 2):
            kappa[mu - 1, nu - 1] = -3.0 * np.sum(lambda_tensor(mu, nu) * quad)
    return kappa


def coupling_h_from_kappa(kappa: np.ndarray) -> CouplingCoefficients:
    """Pauli decomposition of a 2x2 coupling matrix (chi units)."""
    k11, k12 = kappa[0, 0], kappa[0, 1]
    k21, k22 = kappa[1, 0], kappa[1, 1]
    return CouplingCoefficients(
        h0=((k11 + k22) / 2.0).real,
        h1=((k12 + k21) / 2.0).real,
        h2=((k12 - k21) / 2.0j).real,
        h3=((k22 - k11) / 2.0).real,
    )


def chi_factor(einstein_A, k0, detuning):
    """Light-shift scale chi = A*pi*eps0 / (4 k0^3 Delta), J per (V/m)^2."""
    if k0 <= 0:
        raise ValueError(f"k0 must be > 0, got {k0}")
    if detuning == 0:
        raise ValueError("detuning must be nonzero")
    return einstein_A * math.pi * EPS0 / (4.0 * k0**3 * detuning)


@dataclass(frozen=True)
class PlaneWave:
    """Plane-wave beam: real amplitude (V/m), wavevector (1/m), angular frequency, phase."""

    amplitude: float
    wavevector: tuple
    omega: float
    phase: float = 0.0

    def __post_init__(self):
        if self.amplitude < 0:
            raise ValueError(f"amplitude must be >= 0, got {self.amplitude}")
        if len(self.wavevector) != 3:
            raise ValueError("wavevector must have three components")


def standing_wave_potential(pump: PlaneWave, stokes: PlaneWave, chi, position, time):
    """Interference potential of two Z-polarized beams at a point, in Joules.

    Returns chi * 2|E_p E_s*| * cos[(k_p - k_s).r - (w_p - w_s) t + phi]
    with phi the beam phase difference; the static |E|^2 terms carry no
    dynamics and are dropped.
    """
    dk = np.asarray(pump.wavevector, dtype=float) - np.asarray(stokes.wavevector, dtype=float)
    r = np.asarray(position, dtype=float)
    phi = pump.phase - stokes.phase
    arg = float(np.dot(dk, r)) - (pump.omega - stokes.omega) * time + phi
    return chi * 2.0 * pump.amplitude * stokes.amplitude * math.cos(arg)
