"""Classical dynamics of the driven oscillator.

Three flows over the same physics:

* Cartesian:      xi'' + xi = epsilon * sin(xi - mu*tau)
* action-angle:   the exact (ell, phi) equations obtained from the
                  canonical transform xi = 2 eta sqrt(N ell) cos(Theta),
                  v = -2 eta sqrt(N ell) sin(Theta), Theta = (phi + mu*tau)/N
* resonance (NR): the autonomous pendulum-like Hamiltonian
                  H0 = ell*delta + (epsilon/2 eta^2) J_N(z) cos(phi + pi N/2),
                  z = 2 eta sqrt(N ell)

plus Poincare sections, the largest Lyapunov exponent, and width /
frequency estimates for the resonance island.  Integration uses an
embedded Runge-Kutta 5(4) pair with dense output (rtol 1e-10,
atol 1e-12 defaults); a fixed-step order-8 scheme is provided purely
as a verification oracle.
"""

from dataclasses import dataclass, field
import math
import warnings
from concurrent.futures import ProcessPoolExecutor

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .bessel import bessel_j, bessel_j_prime, bessel_j_and_prime
from .params import DimensionlessParams

# Below this action the 1/sqrt(ell) terms of the angle equations are
# numerically dangerous; the Cartesian representation has no such limit.
ELL_MIN = 1e-6

DEFAULT_RTOL = 1e-10
DEFAULT_ATOL = 1e-12


class IntegrationError(RuntimeError):
    """Integration failed; carries the tau at which it happened."""

    def __init__(self, message, tau=None):
        super().__init__(message)
        self.tau = tau


class SingularityError(IntegrationError):
    """Action-angle flow approached ell < ELL_MIN where 1/sqrt(ell) diverges."""


@dataclass(frozen=True)
class ClassicalState:
    """Phase-space point (xi, dxi/dtau) at dimensionless time tau."""

    xi: float
    v: float
    tau: float = 0.0

    def __post_init__(self):
        if not all(map(math.isfinite, (self.xi, self.v, self.tau))):
            raise ValueError(f"state components must be finite: {self}")


@dataclass(frozen=True)
class ActionAngleState:
    """Action-angle point (ell, phi) at dimensionless time tau.

    ``phi`` is kept unwrapped.  ``phi_indeterminate`` flags the ell = 0
    origin where no phase is defined.
    """

    ell: float
    phi: float
    tau: float = 0.0
    phi_indeterminate: bool = False

    def __post_init__(self):
        if self.ell < 0 or not math.isfinite(self.ell):
            raise ValueError(f"ell must be finite and >= 0, got {self.ell}")
        if not self.phi_indeterminate and not math.isfinite(self.phi):
            raise ValueError(f"phi must be finite, got {self.phi}")

    def z(self, p: DimensionlessParams, N=None):
        """Dimensionless oscillation amplitude z = 2*eta*sqrt(N*ell)."""
        n = p.N if N is None else N
        return 2.0 * p.eta * math.sqrt(n * self.ell)

    def phi_wrapped(self):
        """phi folded into (-pi, pi] for plotting."""
        w = math.remainder(self.phi, 2.0 * math.pi)
        return w if w != -math.pi else math.pi


@dataclass(frozen=True)
class Trajectory:
    """Uniformly sampled trajectory in either representation.

    ``data`` has shape (2, n): rows (xi, v) for 'cartesian', (ell, phi)
    for 'action-angle'.  ``meta`` records integrator method, tolerances
    and the model parameters that produced the run.
    """

    tau: np.ndarray
    data: np.ndarray
    representation: str
    dtau: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.representation not in ("cartesian", "action-angle"):
            raise ValueError(f"unknown representation {self.representation!r}")
        if self.dtau <= 0:
            raise ValueError(f"dtau must be > 0, got {self.dtau}")
        steps = np.diff(self.tau)
        if len(self.tau) >= 2 and not (
            np.all(steps > 0) and np.allclose(steps, self.dtau, rtol=1e-9, atol=1e-12)
        ):
            raise ValueError("tau samples must be strictly increasing and uniform")

    @property
    def xi(self):
        self._require("cartesian")
        return self.data[0]

    @property
    def v(self):
        self._require("cartesian")
        return self.data[1]

    @property
    def ell(self):
        self._require("action-angle")
        return self.data[0]

    @property
    def phi(self):
        self._require("action-angle")
        return self.data[1]

    def _require(self, rep):
        if self.representation != rep:
            raise AttributeError(f"trajectory is {self.representation}, not {rep}")

    def states(self):
        if self.representation == "cartesian":
            return [
                ClassicalState(xi=x, v=v, tau=t)
                for t, x, v in zip(self.tau, self.data[0], self.data[1])
            ]
        return [
            ActionAngleState(ell=l, phi=ph, tau=t)
            for t, l, ph in zip(self.tau, self.data[0], self.data[1])
        ]

    def columns(self):
        if self.representation == "cartesian":
            return ("tau", "xi", "v")
        return ("tau", "ell", "phi")


@dataclass(frozen=True)
class PoincareSet:
    """Stroboscopic (xi, v) samples at integer multiples of the drive period."""

    xi: np.ndarray
    v: np.ndarray
    times: np.ndarray
    drive_period: float
    meta: dict = field(default_factory=dict)
    error: str = None


def _output_grid(tau0, tau_end, dtau_out):
    n = int(round((tau_end - tau0) / dtau_out))
    if not math.isclose(tau0 + n * dtau_out, tau_end, rel_tol=1e-9, abs_tol=1e-12):
        n = int(math.floor((tau_end - tau0) / dtau_out + 1e-9))
    return tau0 + dtau_out * np.arange(n + 1)


def _run_ivp(rhs, tau0, tau_end, y0, rtol, atol, method, events=None, t_eval=None):
    sol = solve_ivp(
        rhs,
        (tau0, tau_end),
        y0,
        method=method,
        rtol=rtol,
        atol=atol,
        dense_output=t_eval is None,
        t_eval=t_eval,
        events=events,
    )
    if sol.status == -1:
        raise IntegrationError(f"integration failed: {sol.message}", tau=sol.t[-1] if len(sol.t) else tau0)
    return sol


def cartesian_rhs(tau, y, epsilon, mu):
    """Right-hand side of the driven oscillator in (xi, v)."""
    xi, v = y
    return (v, -xi + epsilon * math.sin(xi - mu * tau))


def integrate_cartesian(
    init: ClassicalState,
    p: DimensionlessParams,
    tau_end,
    dtau_out,
    rtol=DEFAULT_RTOL,
    atol=DEFAULT_ATOL,
    method="RK45",
) -> Trajectory:
    """Integrate xi'' + xi = epsilon sin(xi - mu tau), sampling every dtau_out."""
    if tau_end <= init.tau:
        raise ValueError(f"tau_end ({tau_end}) must exceed init.tau ({init.tau})")
    if dtau_out <= 0:
        raise ValueError(f"dtau_out must be > 0, got {dtau_out}")
    eps, mu = p.epsilon, p.mu
    grid = _output_grid(init.tau, tau_end, dtau_out)
    sol = _run_ivp(
        lambda t, y: cartesian_rhs(t, y, eps, mu),
        init.tau, tau_end, (init.xi, init.v), rtol, atol, method, t_eval=grid,
    )
    return Trajectory(
        tau=sol.t,
        data=sol.y,
        representation="cartesian",
        dtau=dtau_out,
        meta=_meta(p, method, rtol, atol, init=(init.xi, init.v)),
    )


def _meta(p, method, rtol, atol, **extra):
    m = dict(
        epsilon=p.epsilon, eta=p.eta, N=p.N, delta=p.delta, mu=p.mu,
        method=method, rtol=rtol, atol=atol,
    )
    m.update(extra)
    return m


# ---------------------------------------------------------------------------
# Canonical transform

def to_action_angle(s: ClassicalState, p: DimensionlessParams, N=None) -> ActionAngleState:
    """Map (xi, v) to (ell, phi) at the same tau.

    ell = (xi^2 + v^2) / (4 eta^2 N); phi = N*atan2(-v, xi) - mu*tau.
    At the origin the phase is indeterminate: ell = 0 is returned with
    the flag set (and phi = 0 as a placeholder).
    """
    p.require_coupling()
    n = p.N if N is None else N
    r2 = s.xi**2 + s.v**2
    ell = r2 / (4.0 * p.eta**2 * n)
    if r2 == 0.0:
        return ActionAngleState(ell=0.0, phi=0.0, tau=s.tau, phi_indeterminate=True)
    theta = math.atan2(-s.v, s.xi)
    return ActionAngleState(ell=ell, phi=n * theta - p.mu * s.tau, tau=s.tau)


def from_action_angle(a: ActionAngleState, p: DimensionlessParams, N=None) -> ClassicalState:
    """Map (ell, phi) back to (xi, v); ell = 0 maps to the origin for any phi."""
    p.require_coupling()
    n = p.N if N is None else N
    if a.ell == 0.0:
        return ClassicalState(xi=0.0, v=0.0, tau=a.tau)
    amp = 2.0 * p.eta * math.sqrt(n * a.ell)
    theta = (a.phi + p.mu * a.tau) / n
    return ClassicalState(xi=amp * math.cos(theta), v=-amp * math.sin(theta), tau=a.tau)


def hamiltonian_cartesian(s: ClassicalState, p: DimensionlessParams):
    """Dimensionless Hamiltonian (xi^2 + v^2)/(4 eta^2) + (eps/2 eta^2) cos(xi - mu tau)."""
    p.require_coupling()
    two_eta2 = 2.0 * p.eta**2
    return (s.xi**2 + s.v**2) / (2.0 * two_eta2) + (p.epsilon / two_eta2) * math.cos(
        s.xi - p.mu * s.tau
    )


def hamiltonian_action_angle(a: ActionAngleState, p: DimensionlessParams, N=None):
    """Exact dimensionless Hamiltonian in (ell, phi); equals the Cartesian one minus mu*ell."""
    p.require_coupling()
    n = p.N if N is None else N
    z = a.z(p, n)
    theta = (a.phi + p.mu * a.tau) / n
    return a.ell * p.delta + (p.epsilon / (2.0 * p.eta**2)) * math.cos(
        z * math.cos(theta) - p.mu * a.tau
    )


# ---------------------------------------------------------------------------
# Exact action-angle flow

def _action_angle_rhs(tau, y, eps, eta, n, delta, mu):
    ell, phi = y
    ell = max(ell, ELL_MIN * 1e-3)  # RHS stays finite while the event brackets
    z = 2.0 * eta * math.sqrt(n * ell)
    theta = (phi + mu * tau) / n
    s = math.sin(z * math.cos(theta) - mu * tau)
    dell = -(eps / eta) * math.sqrt(ell / n) * s * math.sin(theta)
    dphi = delta - (eps / (2.0 * eta)) * math.sqrt(n / ell) * s * math.cos(theta)
    return (dell, dphi)


def integrate_exact_action_angle(
    init: ActionAngleState,
    p: DimensionlessParams,
    tau_end,
    dtau_out,
    N=None,
    rtol=DEFAULT_RTOL,
    atol=DEFAULT_ATOL,
    method="RK45",
) -> Trajectory:
    """Integrate the exact (ell, phi) equations of motion.

    Aborts with :class:`SingularityError` if the trajectory reaches
    ell < ELL_MIN, where the 1/sqrt(ell) terms diverge; use the
    Cartesian representation near the origin instead.
    """
    p.require_coupling()
    n = p.N if N is None else N
    if init.ell <= ELL_MIN:
        raise SingularityError(
            f"initial ell = {init.ell} is not above ELL_MIN = {ELL_MIN}", tau=init.tau
        )
    if tau_end <= init.tau:
        raise ValueError(f"tau_end ({tau_end}) must exceed init.tau ({init.tau})")
    if dtau_out <= 0:
        raise ValueError(f"dtau_out must be > 0, got {dtau_out}")

    eps, eta, delta, mu = p.epsilon, p.eta, p.delta, p.mu

    def hit_floor(tau, y):
        return y[0] - ELL_MIN

    hit_floor.terminal = True
    hit_floor.direction = -1

    grid = _output_grid(init.tau, tau_end, dtau_out)
    sol = _run_ivp(
        lambda t, y: _action_angle_rhs(t, y, eps, eta, n, delta, mu),
        init.tau, tau_end, (init.ell, init.phi), rtol, atol, method,
        events=hit_floor, t_eval=grid,
    )
    if sol.status == 1:
        raise SingularityError(
            f"trajectory reached ell < {ELL_MIN} at tau = {sol.t_events[0][0]:.6g}",
            tau=float(sol.t_events[0][0]),
        )
    return Trajectory(
        tau=sol.t,
        data=sol.y,
        representation="action-angle",
        dtau=dtau_out,
        meta=_meta(p, method, rtol, atol, N=n, flow="exact", init=(init.ell, init.phi)),
    )


# ---------------------------------------------------------------------------
# Nonlinear-resonance (single-harmonic) flow

def _nr_rhs(tau, y, eps, eta, n, delta):
    ell, phi = y
    ell = max(ell, ELL_MIN * 1e-3)
    z = 2.0 * eta * math.sqrt(n * ell)
    jn, jnp = bessel_j_and_prime(n, z)
    psi = phi + 0.5 * math.pi * n
    dell = (eps / (2.0 * eta**2)) * jn * math.sin(psi)
    dphi = delta + (eps / (2.0 * eta)) * math.sqrt(n / ell) * jnp * math.cos(psi)
    return (dell, dphi)


def integrate_nr(
    init: ActionAngleState,
    p: DimensionlessParams,
    tau_end,
    dtau_out,
    N=None,
    rtol=DEFAULT_RTOL,
    atol=DEFAULT_ATOL,
    method="RK45",
) -> Trajectory:
    """Integrate the autonomous resonance flow generated by H0."""
    p.require_coupling()
    n = p.N if N is None else N
    if init.ell <= ELL_MIN:
        raise SingularityError(
            f"initial ell = {init.ell} is not above ELL_MIN = {ELL_MIN}", tau=init.tau
        )
    if tau_end <= init.tau:
        raise ValueError(f"tau_end ({tau_end}) must exceed init.tau ({init.tau})")
    if dtau_out <= 0:
        raise ValueError(f"dtau_out must be > 0, got {dtau_out}")

    eps, eta, delta = p.epsilon, p.eta, p.delta

    def hit_floor(tau, y):
        return y[0] - ELL_MIN

    hit_floor.terminal = True
    hit_floor.direction = -1

    grid = _output_grid(init.tau, tau_end, dtau_out)
    sol = _run_ivp(
        lambda t, y: _nr_rhs(t, y, eps, eta, n, delta),
        init.tau, tau_end, (init.ell, init.phi), rtol, atol, method,
        events=hit_floor, t_eval=grid,
    )
    if sol.status == 1:
        raise SingularityError(
            f"trajectory reached ell < {ELL_MIN} at tau = {sol.t_events[0][0]:.6g}",
            tau=float(sol.t_events[0][0]),
        )
    return Trajectory(
        tau=sol.t,
        data=sol.y,
        representation="action-angle",
        dtau=dtau_out,
        meta=_meta(p, method, rtol, atol, N=n, flow="nr", init=(init.ell, init.phi)),
    )


def resonance_hamiltonian_h0(a: ActionAngleState, p: DimensionlessParams, N=None):
    """H0 = ell*delta + (eps/2 eta^2) J_N(z) cos(phi + pi N/2)."""
    p.require_coupling()
    n = p.N if N is None else N
    z = a.z(p, n)
    return a.ell * p.delta + (p.epsilon / (2.0 * p.eta**2)) * bessel_j(n, z) * math.cos(
        a.phi + 0.5 * math.pi * n
    )


# ---------------------------------------------------------------------------
# Resonance-island estimates

@dataclass(frozen=True)
class QnrEstimates:
    """Size and frequency of the dominant resonance island of H0.

    delta_n:  full separatrix width in ell at the elliptic point
    omega_ph: small-oscillation frequency around the elliptic point
    ell_star / phi_star: location of the elliptic point
    ell_hyperbolic: action of the island's bounding saddle
    h0_star / h0_separatrix: H0 at the center and on the separatrix
    """

    delta_n: float
    omega_ph: float
    ell_star: float
    phi_star: float
    ell_hyperbolic: float
    h0_star: float
    h0_separatrix: float
    ell_lower: float
    ell_upper: float


def _h0_of(ell, psi_cos, p, n):
    # H0 along a line of constant cos(phi + pi N / 2) = psi_cos.
    z = 2.0 * p.eta * math.sqrt(n * ell)
    return ell * p.delta + (p.epsilon / (2.0 * p.eta**2)) * bessel_j(n, z) * psi_cos


def _dh0_dell(ell, psi_cos, p, n):
    z = 2.0 * p.eta * math.sqrt(n * ell)
    return p.delta + (p.epsilon / (2.0 * p.eta)) * math.sqrt(n / ell) * bessel_j_prime(n, z) * psi_cos


def _d2h0_dell2(ell, psi_cos, p, n):
    from .bessel import bessel_j_row

    z = 2.0 * p.eta * math.sqrt(n * ell)
    row = bessel_j_row(n + 2, z)
    jm2 = row[n - 2] if n >= 2 else (-row[1] if n == 1 else row[2])  # J_{-1} = -J_1, J_{-2} = J_2
    jpp = 0.25 * (jm2 - 2.0 * row[n] + row[n + 2])
    jp = 0.5 * ((-row[1] if n == 0 else row[n - 1]) - row[n + 1])
    dz_dell = p.eta * math.sqrt(n / ell)
    term1 = (p.epsilon / (2.0 * p.eta**2)) * jpp * dz_dell**2 * psi_cos
    term2 = -(p.epsilon / (4.0 * p.eta)) * math.sqrt(n) * ell**-1.5 * jp * psi_cos
    return term1 + term2


def _zero_actions(p, n, ell_max):
    # Actions of the proper zero-lines of the resonance potential: positive
    # roots of J_N(z(ell)) that actually host a hyperbolic point, which
    # requires |dV/dell| >= |delta| there (the saddle sits at
    # cos(psi) = -delta / V'(ell_0)).  ell = 0 is excluded: V' vanishes
    # with the potential, so no saddle lives at the origin.
    z_max = 2.0 * p.eta * math.sqrt(n * ell_max)
    zs = np.linspace(1e-9, z_max, max(200, int(20 * z_max)))
    vals = np.array([bessel_j(n, z) for z in zs])
    actions = []
    for i in np.nonzero(np.diff(np.sign(vals)) != 0)[0]:
        z0 = brentq(lambda z: bessel_j(n, z), zs[i], zs[i + 1], xtol=1e-13)
        ell0 = z0**2 / (4.0 * p.eta**2 * n)
        v_prime = (p.epsilon / (2.0 * p.eta)) * math.sqrt(n / ell0) * bessel_j_prime(n, z0)
        if abs(v_prime) >= abs(p.delta):
            actions.append(ell0)
    return actions


def qnr_estimates(p: DimensionlessParams, N=None, ell_window=(1e-3, 60.0), grid_points=4000):
    """Locate the dominant resonance island of H0 and measure it.

    Island centers satisfy sin(phi + pi N/2) = 0 and dH0/dell = 0 with a
    definite-signed Hessian.  The separatrix web of this Hamiltonian
    attaches to the actions where the Bessel potential vanishes (there
    H0 is phi-independent and hosts the hyperbolic points), so each
    center is bounded by the level set through the nearer-in-energy
    adjacent zero-line.  Returns the widest island, or None when the
    detuning term dominates and no center exists in the window; with
    fixed detuning the islands dissolve below a finite drive strength,
    which is a real feature, not a search failure.
    """
    p.require_coupling()
    if p.epsilon <= 0:
        raise ValueError("qnr_estimates requires epsilon > 0")
    n = p.N if N is None else N
    lo, hi = ell_window
    lo = max(lo, ELL_MIN)
    ells = np.geomspace(lo, hi, grid_points)

    centers = []
    for psi_cos in (1.0, -1.0):
        g = np.array([_dh0_dell(l, psi_cos, p, n) for l in ells])
        for i in np.nonzero(np.diff(np.sign(g)) != 0)[0]:
            try:
                root = brentq(_dh0_dell, ells[i], ells[i + 1], args=(psi_cos, p, n), xtol=1e-14)
            except ValueError:
                continue
            hll = _d2h0_dell2(root, psi_cos, p, n)
            z = 2.0 * p.eta * math.sqrt(n * root)
            hpp = -(p.epsilon / (2.0 * p.eta**2)) * bessel_j(n, z) * psi_cos
            if hll * hpp > 0:
                centers.append((root, psi_cos, hll, hpp))

    if not centers:
        return None

    zero_actions = _zero_actions(p, n, hi * 1.5)
    best = None
    for ell_c, cos_c, hll_c, hpp_c in centers:
        below = [a for a in zero_actions if a < ell_c]
        above = [a for a in zero_actions if a > ell_c]
        ell_a = max(below) if below else None
        ell_b = min(above) if above else None
        e_center = _h0_of(ell_c, cos_c, p, n)
        lines = [(p.delta * a, a) for a in (ell_a, ell_b) if a is not None]
        if hll_c > 0:  # center is a local minimum: first barrier from below
            lines = [le for le in lines if le[0] > e_center]
            if not lines:
                continue
            e_sep, ell_h = min(lines)
        else:          # local maximum: first barrier from above
            lines = [le for le in lines if le[0] < e_center]
            if not lines:
                continue
            e_sep, ell_h = max(lines)
        lo_edge = ell_a if ell_a is not None else 0.0
        hi_edge = ell_b if ell_b is not None else hi * 1.5
        crossings = _separatrix_crossings(ell_c, cos_c, e_sep, p, n, lo_edge, hi_edge)
        if crossings is None:
            continue
        l_minus, l_plus = crossings
        est = QnrEstimates(
            delta_n=l_plus - l_minus,
            omega_ph=math.sqrt(abs(hll_c * hpp_c)),
            ell_star=ell_c,
            phi_star=_phi_from_cos(cos_c, n),
            ell_hyperbolic=ell_h,
            h0_star=e_center,
            h0_separatrix=e_sep,
            ell_lower=l_minus,
            ell_upper=l_plus,
        )
        if best is None or est.delta_n > best.delta_n:
            best = est
    return best


def _phi_from_cos(psi_cos, n):
    psi = 0.0 if psi_cos > 0 else math.pi
    return psi - 0.5 * math.pi * n


def _separatrix_crossings(ell_c, psi_cos, e_sep, p, n, ell_a, ell_b):
    # Separatrix-level roots of H0(ell, phi_center) = e_sep on each side of
    # the center, inside the bounding zero-line actions.  On the attaching
    # side the level touches the zero line itself, so the root is the edge.
    def f(ell):
        return _h0_of(ell, psi_cos, p, n) - e_sep

    fc = f(ell_c)
    if fc == 0.0:
        return (ell_c, ell_c)
    scale = max(1.0, abs(e_sep), abs(fc))
    out = []
    for edge in (ell_a, ell_b):
        fe = f(edge)
        if abs(fe) < 1e-9 * scale:
            out.append(edge)
        elif fe * fc < 0:
            a, b = (edge, ell_c) if edge < ell_c else (ell_c, edge)
            out.append(brentq(f, a, b, xtol=1e-12))
        else:
            return None
    return (out[0], out[1])


def separatrix_width_by_integration(p: DimensionlessParams, est: QnrEstimates, N=None,
                                    rtol=1e-11, atol=1e-13):
    """Island width measured by integrating the NR flow just inside the separatrix.

    Launches from the center's phi line at an action slightly inside the
    level-set crossing and records the ell excursion over several
    phase-oscillation periods.  Independent cross-check of the
    level-set width in :func:`qnr_estimates`.
    """
    n = p.N if N is None else N
    inset = 1e-2 * max(est.delta_n, 1e-4)
    # Launch just inside the lower level-set crossing on the center's phi
    # line; librations this close to the separatrix are slow, so allow
    # many small-oscillation periods for a full ell excursion.
    start = ActionAngleState(
        ell=max(est.ell_lower + inset, ELL_MIN * 2), phi=est.phi_star, tau=0.0
    )
    period = 2.0 * math.pi / est.omega_ph if est.omega_ph > 0 else 100.0
    traj = integrate_nr(start, p, tau_end=30.0 * period, dtau_out=period / 200.0,
                        N=n, rtol=rtol, atol=atol)
    return float(np.max(traj.ell) - np.min(traj.ell))


# ---------------------------------------------------------------------------
# Poincare sections

def _poincare_one(init, p, n_periods, phase_offset, rtol, atol, method):
    period = 2.0 * math.pi / p.mu
    times = init.tau + period * np.arange(1, n_periods + 1) + phase_offset
    sol = _run_ivp(
        lambda t, y: cartesian_rhs(t, y, p.epsilon, p.mu),
        init.tau, float(times[-1]) * (1.0 + 1e-12) + 1e-12,
        (init.xi, init.v), rtol, atol, method,
    )
    pts = sol.sol(times)
    return PoincareSet(
        xi=pts[0].copy(),
        v=pts[1].copy(),
        times=times,
        drive_period=period,
        meta=_meta(p, method, rtol, atol, init=(init.xi, init.v),
                   n_periods=n_periods, phase_offset=phase_offset),
    )


def poincare_section(
    inits,
    p: DimensionlessParams,
    n_periods,
    phase_offset=0.0,
    rtol=DEFAULT_RTOL,
    atol=DEFAULT_ATOL,
    method="RK45",
    workers=1,
):
    """Stroboscopic sections at tau_k = k * (2 pi / mu) for each initial condition.

    The section epoch can be shifted with ``phase_offset`` (added to
    every sampling time).  Failures are reported per trajectory in the
    result's ``error`` field without aborting the batch; results keep
    input order.
    """
    if p.mu <= 0:
        raise ValueError(f"mu must be > 0, got {p.mu}")
    if n_periods < 1:
        raise ValueError(f"n_periods must be >= 1, got {n_periods}")
    inits = list(inits)
    args = [(s, p, n_periods, phase_offset, rtol, atol, method) for s in inits]
    if workers > 1 and len(inits) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_poincare_one_safe, *a) for a in args]
            return [f.result() for f in futures]
    return [_poincare_one_safe(*a) for a in args]


def _poincare_one_safe(init, p, n_periods, phase_offset, rtol, atol, method):
    try:
        return _poincare_one(init, p, n_periods, phase_offset, rtol, atol, method)
    except Exception as exc:  # noqa: BLE001 - per-trajectory fault isolation
        return PoincareSet(
            xi=np.array([]), v=np.array([]), times=np.array([]),
            drive_period=2.0 * math.pi / p.mu,
            meta=_meta(p, method, rtol, atol, init=(init.xi, init.v)),
            error=f"{type(exc).__name__}: {exc}",
        )


# ---------------------------------------------------------------------------
# Largest Lyapunov exponent

def lyapunov_max(
    init: ClassicalState,
    p: DimensionlessParams,
    tau_total,
    offset=1e-8,
    renorm_dtau=1.0,
    discard_fraction=0.5,
    rtol=DEFAULT_RTOL,
    atol=DEFAULT_ATOL,
    method="RK45",
):
    """Largest Lyapunov exponent by two-trajectory renormalization.

    A companion displaced by ``offset`` in xi is integrated jointly with
    the reference; every ``renorm_dtau`` the separation is rescaled back
    to ``offset`` and its log-stretch recorded.  The exponent is the
    mean stretch rate over the last ``1 - discard_fraction`` of the run.
    A separation overflow merely forces the renormalization early; it
    never aborts the estimate.
    """
    n_seg = int(math.floor(tau_total / renorm_dtau))
    if n_seg < 2:
        raise ValueError("tau_total must cover at least two renormalization intervals")
    drive_periods = tau_total * p.mu / (2.0 * math.pi)
    if drive_periods < 100:
        warnings.warn(
            f"tau_total spans only {drive_periods:.1f} drive periods; "
            "the exponent estimate may not be converged",
            stacklevel=2,
        )
    eps, mu = p.epsilon, p.mu

    def pair_rhs(t, y):
        x1, v1, x2, v2 = y
        return (
            v1, -x1 + eps * math.sin(x1 - mu * t),
            v2, -x2 + eps * math.sin(x2 - mu * t),
        )

    y = np.array([init.xi, init.v, init.xi + offset, init.v])
    tau = init.tau
    logs = np.empty(n_seg)
    for k in range(n_seg):
        sol = _run_ivp(pair_rhs, tau, tau + renorm_dtau, y, rtol, atol, method)
        y = sol.y[:, -1].copy()
        tau = sol.t[-1]
        dx, dv = y[2] - y[0], y[3] - y[1]
        d = math.hypot(dx, dv)
        if not math.isfinite(d) or d == 0.0:
            # Restart the companion; count no stretch for this segment.
            y[2], y[3] = y[0] + offset, y[1]
            logs[k] = 0.0
            continue
        logs[k] = math.log(d / offset)
        scale = offset / d
        y[2] = y[0] + dx * scale
        y[3] = y[1] + dv * scale
    start = int(n_seg * discard_fraction)
    return float(np.mean(logs[start:]) / renorm_dtau)


# ---------------------------------------------------------------------------
# Fixed-step order-8 verification integrator

_RK8_TABLEAU = None


def _rk8_tableau():
    global _RK8_TABLEAU
    if _RK8_TABLEAU is None:
        from scipy.integrate._ivp import dop853_coefficients as dc

        _RK8_TABLEAU = (
            np.ascontiguousarray(dc.A[:12, :12]),
            np.ascontiguousarray(dc.B),
            np.ascontiguousarray(dc.C[:12]),
        )
    return _RK8_TABLEAU


def integrate_cartesian_rk8(init: ClassicalState, p: DimensionlessParams, tau_end, dtau):
    """Fixed-step 8th-order Runge-Kutta endpoint state; verification oracle only.

    No adaptivity, no dense output, no shared code with the production
    integrator; used by the test suite to cross-check
    :func:`integrate_cartesian` at tiny fixed steps.
    """
    if tau_end <= init.tau:
        raise ValueError("tau_end must exceed init.tau")
    n_steps = int(round((tau_end - init.tau) / dtau))
    if not math.isclose(init.tau + n_steps * dtau, tau_end, rel_tol=1e-9, abs_tol=1e-12):
        raise ValueError("(tau_end - init.tau) must be an integer multiple of dtau")
    from numba import njit

    A, B, C = _rk8_tableau()

    @njit(cache=False)
    def run(xi, v, tau, h, n, eps, mu, A, B, C):
        kx = np.empty(12)
        kv = np.empty(12)
        for _ in range(n):
            for i in range(12):
                sx = 0.0
                sv = 0.0
                for j in range(i):
                    sx += A[i, j] * kx[j]
                    sv += A[i, j] * kv[j]
                xs = xi + h * sx
                vs = v + h * sv
                ts = tau + C[i] * h
                kx[i] = vs
                kv[i] = -xs + eps * math.sin(xs - mu * ts)
            dx = 0.0
            dv = 0.0
            for i in range(12):
                dx += B[i] * kx[i]
                dv += B[i] * kv[i]
            xi += h * dx
            v += h * dv
            tau += h
        return xi, v, tau

    xi, v, tau = run(
        float(init.xi), float(init.v), float(init.tau),
        float(dtau), n_steps, p.epsilon, p.mu, A, B, C,
    )
    return ClassicalState(xi=xi, v=v, tau=tau)
