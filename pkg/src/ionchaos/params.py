"""Model parameters and the SI <-> dimensionless conversions.

The dynamics is governed by four dimensionless numbers: the driving
strength ``epsilon``, the Lamb-Dicke parameter ``eta``, the resonance
order ``N`` and the detuning ``delta = N - mu`` where ``mu`` is the
ratio of drive to trap frequency.  ``PhysicalConfig`` describes the
lab setup in SI units, ``derive_dimensionless`` maps it onto these
numbers.
"""

from dataclasses import dataclass, replace
import math

from .constants import C, HBAR


@dataclass(frozen=True)
class DimensionlessParams:
    """Dimensionless parameter tuple (epsilon, eta, N, delta).

    ``delta`` is the stored detuning; ``mu = N - delta`` is computed on
    access so that ``delta + mu == N`` holds exactly in floating point.
    ``eta = 0`` is permitted at construction (it arises from beams at
    right angles to the trap axis); operations that divide by eta must
    reject it themselves.
    """

    epsilon: float
    eta: float
    N: int
    delta: float

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon}")
        if self.eta < 0:
            raise ValueError(f"eta must be >= 0, got {self.eta}")
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N}")
        object.__setattr__(self, "N", int(self.N))

    @classmethod
    def from_mu(cls, epsilon, eta, mu, N=None):
        """Build from the frequency ratio mu; N defaults to the nearest integer.

        For ``0.5*N <= mu <= 2*N`` the subtraction ``N - mu`` is exact
        (Sterbenz), so ``p.mu`` round-trips bit-exactly.
        """
        if mu <= 0:
            raise ValueError(f"mu must be > 0, got {mu}")
        if N is None:
            N = max(1, int(math.floor(mu + 0.5)))
        return cls(epsilon=epsilon, eta=eta, N=int(N), delta=N - mu)

    @property
    def mu(self):
        """Drive/trap frequency ratio."""
        return self.N - self.delta

    @property
    def hbar_eff(self):
        """Effective Planck constant 2*eta**2 of the dimensionless model."""
        return 2.0 * self.eta**2

    def with_epsilon(self, epsilon):
        """Copy with a different driving strength (used by sweeps)."""
        return replace(self, epsilon=float(epsilon))

    def require_coupling(self):
        """Raise if eta == 0, i.e. the drive cannot couple to the motion."""
        if self.eta == 0.0:
            raise ValueError("operation requires eta > 0 (beams at theta = pi/2 give eta = 0)")


# Laboratory defaults: a calcium ion on its 397 nm transition in a
# 500 kHz trap, 10 mW beams focused to 20 um, detuned by 1 GHz, with the
# drive tuned near the fourth harmonic of the trap frequency.
_DEFAULTS = dict(
    mass=6.64e-26,                       # kg
    trap_omega=2.0 * math.pi * 500e3,    # rad/s
    k0=1.58e7,                           # transition wavenumber, 1/m
    einstein_A=1.30e8,                   # 1/s
    laser_power=10e-3,                   # W
    spot_size=20e-6,                     # 1/e^2 intensity radius, m
    detuning=2.0 * math.pi * 1.0e9,      # rad/s
    theta=0.0,                           # half-angle of each beam to the trap axis, rad
    amplitude_ratio=1.0,                 # |E_stokes| / |E_pump|
    drive_omega=2.0 * math.pi * 1.995e6,  # pump - Stokes frequency difference, rad/s
)


@dataclass(frozen=True)
class PhysicalConfig:
    """SI-unit description of the trap and laser setup."""

    mass: float = _DEFAULTS["mass"]
    trap_omega: float = _DEFAULTS["trap_omega"]
    k0: float = _DEFAULTS["k0"]
    einstein_A: float = _DEFAULTS["einstein_A"]
    laser_power: float = _DEFAULTS["laser_power"]
    spot_size: float = _DEFAULTS["spot_size"]
    detuning: float = _DEFAULTS["detuning"]
    theta: float = _DEFAULTS["theta"]
    amplitude_ratio: float = _DEFAULTS["amplitude_ratio"]
    drive_omega: float = _DEFAULTS["drive_omega"]

    def __post_init__(self):
        positives = (
            "mass", "trap_omega", "k0", "einstein_A", "laser_power",
            "spot_size", "detuning", "drive_omega",
        )
        for name in positives:
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")
        if not 0.0 <= self.theta <= math.pi / 2:
            raise ValueError(f"theta must lie in [0, pi/2], got {self.theta}")
        if self.amplitude_ratio <= 0:
            raise ValueError(f"amplitude_ratio must be > 0, got {self.amplitude_ratio}")

    @property
    def effective_wavevector(self):
        """Wavevector difference of the counter-inclined beams along the trap axis."""
        if self.theta == math.pi / 2:
            return 0.0
        return 2.0 * self.k0 * math.cos(self.theta)


def derive_dimensionless(cfg: PhysicalConfig, N=None) -> DimensionlessParams:
    """Map an SI configuration onto the dimensionless parameter tuple.

    eta     = k * sqrt(hbar / (2 m omega)),   k = 2 k0 cos(theta)
    epsilon = 8 A P s cos^2(theta) / (c k0 m omega^2 w0^2 Delta)
    mu      = drive_omega / trap_omega

    ``N`` defaults to the integer nearest mu; pass it explicitly to pin
    the resonance order while sweeping the detuning.  theta = pi/2
    yields eta = epsilon = 0 (no coupling), which is a valid result
    here; operations needing eta > 0 reject it downstream.
    """
    # cos(pi/2) rounds to ~6e-17, not zero; beams at right angles must
    # give exactly zero coupling.
    cos_t = 0.0 if cfg.theta == math.pi / 2 else math.cos(cfg.theta)
    k = 2.0 * cfg.k0 * cos_t
    eta = k * math.sqrt(HBAR / (2.0 * cfg.mass * cfg.trap_omega))
    epsilon = (
        8.0 * cfg.einstein_A * cfg.laser_power * cfg.amplitude_ratio * cos_t**2
        / (C * cfg.k0 * cfg.mass * cfg.trap_omega**2 * cfg.spot_size**2 * cfg.detuning)
    )
    mu = cfg.drive_omega / cfg.trap_omega
    return DimensionlessParams.from_mu(epsilon=epsilon, eta=eta, mu=mu, N=N)


def tau_to_seconds(tau, trap_omega):
    """Convert dimensionless time tau = omega*t to seconds."""
    if trap_omega <= 0:
        raise ValueError(f"trap_omega must be > 0, got {trap_omega}")
    return tau / trap_omega


def seconds_to_tau(t, trap_omega):
    """Convert seconds to dimensionless time; inverse of :func:`tau_to_seconds`."""
    if trap_omega <= 0:
        raise ValueError(f"trap_omega must be > 0, got {trap_omega}")
    return t * trap_omega
