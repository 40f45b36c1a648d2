"""Fock-basis propagation of the driven oscillator.

The wave function is expanded over the first ``nmax`` eigenstates of
the unperturbed oscillator.  The plane-wave drive couples levels
through the Lamb-Dicke matrix elements

    F_{m,n}(eta) = <m| e^{i xi} |n>
                 = e^{-eta^2/2} (i eta)^{|m-n|} sqrt(min!/max!)
                   L_min^{|m-n|}(eta^2),

and the amplitudes obey

    i dc_m/dtau = (m + 1/2) c_m
                  + (eps / 4 eta^2) sum_n (e^{-i mu tau} F_{mn}
                                           + e^{+i mu tau} F*_{mn}) c_n.

Propagation works in the interaction picture (the diagonal phases are
factored out analytically), so the step size is set by the coupling
strength rather than by the fast phases of high levels.
"""

from dataclasses import dataclass, replace
import cmath
import math

import numpy as np
from scipy.integrate import solve_ivp
from scipy.special import eval_genlaguerre, gammaln

from .params import DimensionlessParams

NORM_TOL = 1e-6          # propagation aborts beyond this norm defect
DEFAULT_TAIL_TOL = 1e-10
TAIL_GUARD = 10          # top levels watched for escaping probability
DEFAULT_NMAX = 200
MAX_DOUBLINGS = 3


class PropagationError(RuntimeError):
    """Quantum propagation failed; carries the tau of the failure."""

    def __init__(self, message, tau=None):
        super().__init__(message)
        self.tau = tau


class NormError(PropagationError):
    """Norm defect exceeded NORM_TOL (the dynamics is no longer unitary)."""


class TailError(PropagationError):
    """Probability reached the top of the basis even after enlarging it."""


@dataclass(frozen=True)
class QuantumState:
    """Truncated Fock-amplitude vector with its Lamb-Dicke eta and time stamp."""

    amplitudes: np.ndarray
    eta: float
    tau: float = 0.0

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        object.__setattr__(self, "amplitudes", amps)
        if amps.ndim != 1 or len(amps) < 1:
            raise ValueError("amplitudes must be a nonempty 1-D complex array")
        if self.eta < 0:
            raise ValueError(f"eta must be >= 0, got {self.eta}")

    @property
    def nmax(self):
        return len(self.amplitudes)

    def norm_defect(self):
        return abs(float(np.sum(np.abs(self.amplitudes) ** 2)) - 1.0)

    def tail_mass(self, guard=TAIL_GUARD):
        return float(np.sum(np.abs(self.amplitudes[-guard:]) ** 2))

    def enlarged(self, nmax):
        if nmax < self.nmax:
            raise ValueError("can only enlarge, not truncate")
        amps = np.zeros(nmax, dtype=complex)
        amps[: self.nmax] = self.amplitudes
        return replace(self, amplitudes=amps)


def ground_state(nmax, eta) -> QuantumState:
    """c_0 = 1: the oscillator ground state, the standard initial condition."""
    amps = np.zeros(nmax, dtype=complex)
    amps[0] = 1.0
    return QuantumState(amplitudes=amps, eta=eta, tau=0.0)


def matrix_element_F(m, n, eta, convention="operator"):
    """Matrix element <m| e^{i xi} |n> for oscillator eigenstates built with eta.

    The closed form is evaluated in log space (stable up to m, n ~ 1e4).
    ``convention="operator"`` is the quadrature-calibrated default, for
    which F_{0,0} = e^{-eta^2/2}.  ``convention="plane-kernel"`` keeps
    the alternative e^{-eta^2} normalization (kernel frequency twice as
    large) purely for comparison; it is never used by the propagator.
    """
    if m < 0 or n < 0 or int(m) != m or int(n) != n:
        raise ValueError(f"m, n must be nonnegative integers, got {(m, n)}")
    if m > 10**4 or n > 10**4:
        raise ValueError("matrix elements supported for m, n <= 1e4")
    if convention == "plane-kernel":
        return matrix_element_F(m, n, math.sqrt(2.0) * eta, convention="operator")
    if convention != "operator":
        raise ValueError(f"unknown convention {convention!r}")
    if eta == 0.0:
        return 1.0 + 0.0j if m == n else 0.0j
    d = abs(m - n)
    lo = min(m, n)
    log_mag = (
        -0.5 * eta**2
        + d * math.log(eta)
        + 0.5 * (gammaln(lo + 1) - gammaln(lo + d + 1))
    )
    lag = float(eval_genlaguerre(lo, d, eta**2))
    return (1.0j) ** d * lag * math.exp(log_mag)


@dataclass(frozen=True)
class CoupledMatrix:
    """Dense matrix F[m, n] = <m| e^{i xi} |n> for one eta and basis size.

    ``interior_margin`` is the number of top levels excluded from the
    truncated-unitarity check: couplings reach across the classical
    bandwidth ~ 2*eta*sqrt(n), so rows near the truncation edge cannot
    be unitary no matter how large the basis.
    """

    F: np.ndarray
    eta: float
    interior_margin: int
    unitarity_defect: float


def _coupling_values(nmax, eta):
    F = np.zeros((nmax, nmax), dtype=complex)
    if eta == 0.0:
        np.fill_diagonal(F, 1.0)
        return F
    log_eta = math.log(eta)
    for d in range(nmax):
        lo = np.arange(nmax - d)
        log_mag = (
            -0.5 * eta**2
            + d * log_eta
            + 0.5 * (gammaln(lo + 1) - gammaln(lo + d + 1))
        )
        vals = (1.0j) ** d * eval_genlaguerre(lo, d, eta**2) * np.exp(log_mag)
        idx = np.arange(nmax - d)
        F[idx, idx + d] = vals
        F[idx + d, idx] = vals
    return F


def build_coupling(nmax, eta, tail_tol=DEFAULT_TAIL_TOL) -> CoupledMatrix:
    """Build the coupling matrix and verify its invariants.

    Checked at build time: exact symmetry by construction, and
    truncated unitarity ||F F^dag - I||_max < tail_tol on the interior
    block.  The interior margin is found adaptively; if even half the
    basis cannot pass, the truncation is inadequate for this eta and
    the offending element is reported.
    """
    if nmax < 2:
        raise ValueError(f"nmax must be >= 2, got {nmax}")
    F = _coupling_values(nmax, eta)
    asym = np.max(np.abs(F - F.T))
    if asym != 0.0:
        i, j = np.unravel_index(np.argmax(np.abs(F - F.T)), F.shape)
        raise ValueError(f"coupling matrix asymmetric at (m, n) = ({i}, {j}): defect {asym:g}")
    defect = np.abs(F @ F.conj().T - np.eye(nmax))
    margin = _interior_margin(defect, tail_tol)
    if margin is None:
        i, j = np.unravel_index(np.argmax(defect), defect.shape)
        raise ValueError(
            f"truncated unitarity fails even on the half basis: defect "
            f"{defect[i, j]:g} at (m, n) = ({i}, {j}); increase nmax for eta = {eta}"
        )
    interior = defect[: nmax - margin, : nmax - margin]
    return CoupledMatrix(
        F=F,
        eta=eta,
        interior_margin=margin,
        unitarity_defect=float(interior.max()) if interior.size else 0.0,
    )


def _interior_margin(defect, tol):
    # Smallest margin whose leading block keeps the defect below tol.
    nmax = defect.shape[0]
    block_max = 0.0
    largest_ok = 0
    for k in range(1, nmax + 1):
        block_max = max(block_max, defect[k - 1, :k].max(), defect[:k, k - 1].max())
        if block_max < tol:
            largest_ok = k
    if largest_ok < nmax - nmax // 2:
        return None
    return nmax - largest_ok


def probabilities(s: QuantumState):
    """Level populations P_n = |c_n|^2."""
    return np.abs(s.amplitudes) ** 2


def xi_squared_expect(s: QuantumState):
    """<xi^2> from the ladder representation xi = eta (a + a^dag)."""
    c = s.amplitudes
    n = np.arange(len(c))
    diag = float(np.sum((2.0 * n + 1.0) * np.abs(c) ** 2))
    off = 0.0
    if len(c) > 2:
        k = np.arange(len(c) - 2)
        off = 2.0 * float(
            np.real(np.sum(np.conj(c[k + 2]) * c[k] * np.sqrt((k + 1.0) * (k + 2.0))))
        )
    return s.eta**2 * (diag + off)


def xi_expect(s: QuantumState):
    """<xi> = eta <a + a^dag>."""
    c = s.amplitudes
    if len(c) < 2:
        return 0.0
    k = np.arange(1, len(c))
    return 2.0 * s.eta * float(np.real(np.sum(np.conj(c[k - 1]) * c[k] * np.sqrt(k))))


def h_lo_expect(s: QuantumState):
    """Unperturbed-oscillator energy <H_LO> = sum_n 2 eta^2 (n + 1/2) P_n."""
    p = probabilities(s)
    n = np.arange(len(p))
    return 2.0 * s.eta**2 * float(np.sum((n + 0.5) * p))


def propagate(
    init: QuantumState,
    p: DimensionlessParams,
    tau_end,
    dtau_out,
    nmax=None,
    rtol=1e-10,
    atol=1e-12,
    tail_tol=DEFAULT_TAIL_TOL,
    method="DOP853",
):
    """Propagate the amplitude equations, emitting states every dtau_out.

    The basis starts at ``nmax`` (default max(len(init), 200)) and is
    doubled automatically, up to three times, whenever the probability
    in the top TAIL_GUARD levels exceeds ``tail_tol``; the run restarts
    from the last emitted state.  A norm defect beyond NORM_TOL aborts
    with :class:`NormError`.
    """
    if p.eta != init.eta:
        raise ValueError(f"params eta ({p.eta}) differs from state eta ({init.eta})")
    p.require_coupling()
    if init.norm_defect() > NORM_TOL:
        raise ValueError(f"initial state norm defect {init.norm_defect():g} exceeds {NORM_TOL:g}")
    if tau_end <= init.tau:
        raise ValueError(f"tau_end ({tau_end}) must exceed init.tau ({init.tau})")
    if dtau_out <= 0:
        raise ValueError(f"dtau_out must be > 0, got {dtau_out}")

    size = max(init.nmax, nmax or DEFAULT_NMAX)
    n_out = int(round((tau_end - init.tau) / dtau_out))
    grid = init.tau + dtau_out * np.arange(n_out + 1)

    doublings = 0
    current = init.enlarged(size) if init.nmax < size else init
    out = [current]
    start_idx = 1
    while start_idx <= n_out:
        coupling = build_coupling(size, p.eta, tail_tol=tail_tol)
        try:
            states = _propagate_segment(
                current, p, grid[start_idx:], coupling.F, rtol, atol, tail_tol, method
            )
        except _TailBreach as breach:
            if doublings >= MAX_DOUBLINGS:
                raise TailError(
                    f"tail mass {breach.tail:g} exceeds {tail_tol:g} at tau = "
                    f"{breach.tau:g} after {MAX_DOUBLINGS} basis doublings",
                    tau=breach.tau,
                ) from None
            out.extend(breach.good_states)
            start_idx += len(breach.good_states)
            doublings += 1
            size *= 2
            current = out[-1].enlarged(size)
            continue
        out.extend(states)
        break
    return out


class _TailBreach(Exception):
    def __init__(self, good_states, tau, tail):
        self.good_states = good_states
        self.tau = tau
        self.tail = tail


_BAND_CUT = 1e-18  # diagonals entirely below this are dropped from the matvec
_banded_kernel = None


def _get_banded_kernel():
    global _banded_kernel
    if _banded_kernel is None:
        from numba import njit

        @njit(cache=False)
        def kernel(g_re, g_im, ca, sa, ur, ui, wr, wi):
            nd, n = g_re.shape
            for i in range(n):
                wr[i] = 0.0
                wi[i] = 0.0
            for d in range(nd):
                for i in range(n - d):
                    g = ca * g_re[d, i] + sa * g_im[d, i]
                    wr[i] += g * ur[i + d]
                    wi[i] += g * ui[i + d]
                    if d > 0:
                        wr[i + d] += g * ur[i]
                        wi[i + d] += g * ui[i]

        _banded_kernel = kernel
    return _banded_kernel


def _banded_diagonals(F):
    # Upper diagonals of the symmetric F, split into real/imaginary parts;
    # |F| decays superexponentially past the classical bandwidth, so the
    # dropped diagonals are below any integration tolerance.
    nmax = F.shape[0]
    width = nmax
    for d in range(nmax - 1, -1, -1):
        if np.max(np.abs(np.diagonal(F, d))) > _BAND_CUT:
            width = d + 1
            break
    g_re = np.zeros((width, nmax))
    g_im = np.zeros((width, nmax))
    for d in range(width):
        diag = np.diagonal(F, d)
        if d % 2 == 0:
            g_re[d, : nmax - d] = diag.real
        else:
            g_im[d, : nmax - d] = diag.imag
    return g_re, g_im


def _propagate_segment(init, p, taus, F, rtol, atol, tail_tol, method):
    nmax = init.nmax
    half_eps = p.epsilon / (2.0 * p.eta**2)
    mu = p.mu
    n_idx = np.arange(nmax)
    # F has real entries on even |m - n| and imaginary on odd, so the
    # Hermitian drive (eps/4 eta^2)(e^{-i mu tau} F + c.c.) reduces to
    # (eps/2 eta^2)(cos(mu tau) Re F + sin(mu tau) Im F), applied here
    # as a banded symmetric matvec.
    g_re, g_im = _banded_diagonals(F)
    kernel = _get_banded_kernel()
    wr = np.empty(nmax)
    wi = np.empty(nmax)

    def rhs(tau, b):
        ph = np.exp(1j * n_idx * tau)
        u = np.conj(ph) * b
        kernel(
            g_re, g_im,
            half_eps * math.cos(mu * tau), half_eps * math.sin(mu * tau),
            np.ascontiguousarray(u.real), np.ascontiguousarray(u.imag),
            wr, wi,
        )
        return -1j * (ph * (wr + 1j * wi))

    b0 = init.amplitudes * np.exp(1j * (n_idx + 0.5) * init.tau)
    sol = solve_ivp(
        rhs, (init.tau, float(taus[-1])), b0,
        method=method, rtol=rtol, atol=atol, t_eval=taus,
    )
    if sol.status != 0:
        raise PropagationError(f"propagation failed: {sol.message}",
                               tau=sol.t[-1] if len(sol.t) else init.tau)
    states = []
    for k, tau in enumerate(sol.t):
        c = sol.y[:, k] * np.exp(-1j * (n_idx + 0.5) * tau)
        state = QuantumState(amplitudes=c, eta=init.eta, tau=float(tau))
        if state.norm_defect() > NORM_TOL:
            raise NormError(
                f"norm defect {state.norm_defect():g} exceeds {NORM_TOL:g} at tau = {tau:g}",
                tau=float(tau),
            )
        if state.tail_mass() > tail_tol:
            raise _TailBreach(states, float(tau), state.tail_mass())
        states.append(state)
    return states


def generator_matrix(p: DimensionlessParams, F, tau):
    """Instantaneous Hamiltonian matrix of the amplitude equations at tau.

    Hermitian by construction; exposed for the invariant checks.
    """
    nmax = F.shape[0]
    w = cmath.exp(-1j * p.mu * tau)
    drive = (p.epsilon / (4.0 * p.eta**2)) * (w * F + np.conj(w * F))
    return np.diag(np.arange(nmax) + 0.5).astype(complex) + drive
