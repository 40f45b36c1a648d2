"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
report.  Tolerances are pinned here and nowhere else.
"""

import json
import math
import warnings

import numpy as np
import pytest

from ionchaos.params import (
    DimensionlessParams,
    PhysicalConfig,
    derive_dimensionless,
    tau_to_seconds,
)
from ionchaos.classical import (
    ActionAngleState,
    ClassicalState,
    from_action_angle,
    integrate_cartesian,
    integrate_exact_action_angle,
    lyapunov_max,
)
from ionchaos.raman import ComplexFieldVector, coupling_h, lambda_tensor, lambda_tensor_from_3j
from ionchaos.quantum import (
    ground_state,
    matrix_element_F,
    probabilities,
    propagate,
    xi_squared_expect,
)
from ionchaos.spectral import (
    ENTROPY_ONSET_THRESHOLD,
    TimeSeries,
    entropy_crossover,
    power_spectrum,
    spectral_entropy,
)
from ionchaos.cli import main
from ionchaos.csvio import read_csv, sha256_file
from oracles import matrix_element_quad


def report(number, name, detail=""):
    suffix = f"  ({detail})" if detail else ""
    print(f"\nACCEPTANCE {number} PASS  {name}{suffix}")


def base_params(eps):
    return DimensionlessParams(epsilon=eps, eta=0.45, N=4, delta=0.01)


def test_criterion_1_unit_conversion_anchors():
    cfg = PhysicalConfig()  # reference calcium setup, theta = 0, s = 1
    p = derive_dimensionless(cfg)
    assert abs(p.epsilon - 1333.0) / 1333.0 < 5e-3
    assert abs(p.eta - 0.502) / 0.502 < 2e-3
    # scaled variant: epsilon tracks s cos^2(theta), eta tracks cos(theta)
    import dataclasses

    tilted = dataclasses.replace(cfg, theta=0.6, amplitude_ratio=1.7)
    q = derive_dimensionless(tilted)
    want_eps = 1333.0 * 1.7 * math.cos(0.6) ** 2
    want_eta = 0.502 * math.cos(0.6)
    assert abs(q.epsilon - want_eps) / want_eps < 5e-3
    assert abs(q.eta - want_eta) / want_eta < 2e-3
    omega = 2 * math.pi * 500e3
    assert abs(tau_to_seconds(100.0, omega) - 31.8e-6) / 31.8e-6 < 1e-3
    assert abs(tau_to_seconds(30.0, omega) - 9.54e-6) / 9.54e-6 < 1e-3
    report(1, "unit conversion anchors",
           f"epsilon={p.epsilon:.1f}, eta={p.eta:.4f}")


def test_criterion_2_coupling_tensor_oracle():
    worst = 0.0
    for mu in (1, 2):
        for nu in (1, 2):
            diff = np.max(np.abs(lambda_tensor(mu, nu) - lambda_tensor_from_3j(mu, nu)))
            worst = max(worst, float(diff))
    assert worst < 1e-14
    rng = np.random.default_rng(123)
    for _ in range(1000):
        ez = complex(rng.normal(), rng.normal())
        h = coupling_h(ComplexFieldVector(0.0, 0.0, ez))
        assert h.h1 == 0.0 and h.h2 == 0.0 and h.h3 == 0.0
    report(2, "coupling tensors vs angular-momentum sums",
           f"max tensor defect {worst:.2e}")


def test_criterion_3_cross_representation_oracle():
    p = base_params(1.0)
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(20):
        ell0 = rng.uniform(0.5, 20.0)
        phi0 = rng.uniform(0.0, 2 * math.pi)
        a0 = ActionAngleState(ell=ell0, phi=phi0, tau=0.0)
        s0 = from_action_angle(a0, p)
        cart = integrate_cartesian(s0, p, 50.0, 0.25)
        angl = integrate_exact_action_angle(a0, p, 50.0, 0.25)
        for k in range(len(cart.tau)):
            mapped = from_action_angle(
                ActionAngleState(angl.ell[k], angl.phi[k], angl.tau[k]), p
            )
            worst = max(worst, abs(mapped.xi - cart.xi[k]), abs(mapped.v - cart.v[k]))
    assert worst < 1e-6
    report(3, "Cartesian vs action-angle flow equivalence", f"max deviation {worst:.2e}")


def test_criterion_4_chaos_onset():
    init = ClassicalState(0.0, 0.0, 0.0)
    lam = {}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for eps in (0.0, 0.5, 1.0, 2.0, 4.0, 10.0, 20.0):
            lam[eps] = lyapunov_max(init, base_params(eps), 2000.0)
    for eps in (0.0, 0.5, 1.0, 2.0, 4.0):
        assert lam[eps] < 0.01, f"lambda({eps}) = {lam[eps]}"
    for eps in (10.0, 20.0):
        assert lam[eps] > 0.05, f"lambda({eps}) = {lam[eps]}"
    # Onset location from the spectral indicator over the figure horizon
    # tau <= 100: the entropy classifier puts the discrete-to-broadband
    # crossover inside [6, 10].
    grid = [0.0, 0.5, 1.0, 2.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0, 20.0]
    entropies = []
    for eps in grid:
        traj = integrate_cartesian(init, base_params(eps), 100.0, 0.05)
        spec = power_spectrum(TimeSeries(traj.xi, 0.05))
        entropies.append(0.0 if np.sum(spec.power) == 0 else spectral_entropy(spec))
    crossover = entropy_crossover(grid, entropies, ENTROPY_ONSET_THRESHOLD)
    assert crossover is not None and 6.0 <= crossover <= 10.0, (
        f"crossover {crossover}, entropies {entropies}"
    )
    report(4, "chaos onset",
           f"lambda(4)={lam[4.0]:.2e}, lambda(10)={lam[10.0]:.3f}, crossover={crossover}")


def test_criterion_5_classical_spectral_transition():
    init = ClassicalState(0.0, 0.0, 0.0)
    ent = {}
    for eps in (5.0, 20.0):
        traj = integrate_cartesian(init, base_params(eps), 100.0, 0.05)
        ent[eps] = spectral_entropy(power_spectrum(TimeSeries(traj.xi, 0.05)))
    assert ent[20.0] - ent[5.0] > 0.2
    report(5, "classical spectral transition",
           f"H(20)-H(5) = {ent[20.0] - ent[5.0]:.3f}")


def test_criterion_6_matrix_element_oracle():
    val = matrix_element_F(0, 0, 0.45)
    assert abs(val - math.exp(-0.10125)) < 1e-12
    worst = 0.0
    for eta in (0.1, 0.45, 0.9):
        for m in range(41):
            for n in range(m, 41):
                closed = matrix_element_F(m, n, eta)
                oracle = matrix_element_quad(m, n, eta)
                worst = max(worst, abs(closed - oracle))
    assert worst < 1e-10
    report(6, "Lamb-Dicke matrix elements vs adaptive quadrature",
           f"max defect {worst:.2e} over m, n <= 40")


def test_criterion_7_quantum_propagation_invariants():
    # Free case: populations constant to machine precision.
    states0 = propagate(ground_state(200, 0.45), base_params(0.0), 30.0, 0.5)
    p_init = probabilities(states0[0])
    for s in states0:
        assert np.max(np.abs(probabilities(s) - p_init)) < 1e-15
    drifts = {}
    converg = {}
    for eps in (1.0, 5.0, 7.5, 8.0):
        p = base_params(eps)
        states = propagate(ground_state(200, 0.45), p, 30.0, 0.1)
        drifts[eps] = max(s.norm_defect() for s in states)
        assert drifts[eps] < 1e-8, f"norm drift {drifts[eps]} at eps={eps}"
        # Truncation convergence at fixed bases (doubling suppressed so the
        # comparison is between two pinned truncations).
        nmax = 200 if eps <= 1.0 else 400
        a = propagate(ground_state(nmax, 0.45), p, 30.0, 30.0, nmax=nmax, tail_tol=1.0)
        b = propagate(ground_state(2 * nmax, 0.45), p, 30.0, 30.0, nmax=2 * nmax,
                      tail_tol=1.0)
        converg[eps] = abs(probabilities(a[-1])[0] - probabilities(b[-1])[0])
        assert converg[eps] < 1e-6, f"dP0 {converg[eps]} at eps={eps}"
    report(7, "quantum propagation invariants",
           f"worst norm drift {max(drifts.values()):.2e}, "
           f"worst dP0 {max(converg.values()):.2e}")


def test_criterion_8_quantum_spectral_modification():
    ent = {}
    for eps in (1.0, 8.0):
        p = base_params(eps)
        states = propagate(ground_state(200, 0.45), p, 30.0, 0.01)
        p0 = np.array([probabilities(s)[0] for s in states])
        xi2 = np.array([xi_squared_expect(s) for s in states])
        ent[eps] = (
            spectral_entropy(power_spectrum(TimeSeries(p0, 0.01))),
            spectral_entropy(power_spectrum(TimeSeries(xi2, 0.01))),
        )
    assert ent[8.0][0] > ent[1.0][0]
    assert ent[8.0][1] > ent[1.0][1]
    report(8, "quantum spectral modification",
           f"H[P0]: {ent[1.0][0]:.3f} -> {ent[8.0][0]:.3f}; "
           f"H[xi2]: {ent[1.0][1]:.3f} -> {ent[8.0][1]:.3f}")


def test_criterion_9_determinism(tmp_path):
    # Worker-count independence of sweep bytes.
    sweep_args = [
        "--set", "scan.tau_lyapunov=50", "--set", "scan.tau_spectrum=30",
        "--set", "scan.dtau_out=0.1",
    ]
    blobs = {}
    for workers in ("1", "8"):
        out = tmp_path / f"sweep{workers}"
        assert main(["sweep", "scan-fig5", "--out", str(out),
                     "--workers", workers, *sweep_args]) == 0
        blobs[workers] = (out / "scan-fig5.csv").read_bytes()
    assert blobs["1"] == blobs["8"]

    # Manifest replay for a representative preset of every output path.
    # The runtime bound forces reduced grids; the reductions are ordinary
    # overrides, so they land in the manifest and the replay covers the
    # identical computation.
    cases = {
        "fig5": ["--set", "classical.tau_end=20"],
        "fig7": ["--set", "classical.tau_end=20", "--set", "epsilons=[1.0, 5.0]"],
        "fig4a": ["--set", "classical.n_periods=20",
                  "--set", "epsilons=[2.0]"],
        "fig9": ["--set", "quantum.tau_end=2.0", "--set", "quantum.dtau_out=0.05",
                 "--set", "quantum.nmax=96", "--set", "epsilons=[0.5, 1.0]"],
        "fig12": ["--set", "quantum.tau_end=3.0", "--set", "quantum.dtau_out=0.02",
                  "--set", "quantum.nmax=96", "--set", "epsilons=[1.0]"],
        "fig15": ["--set", "quantum.tau_end=2.0", "--set", "quantum.dtau_out=0.05",
                  "--set", "quantum.nmax=96", "--set", "epsilons=[0.5]"],
        "scan-fig5": sweep_args + ["--set", "epsilons=[0.5, 2.0]"],
        "raman-check": [],
    }
    for preset, overrides in cases.items():
        first = tmp_path / f"{preset}-first"
        again = tmp_path / f"{preset}-again"
        cmd = "sweep" if preset.startswith("scan") else "run"
        assert main([cmd, preset, "--out", str(first), *overrides]) == 0
        assert main(["run", str(first / "manifest.json"), "--out", str(again)]) == 0
        m1 = json.loads((first / "manifest.json").read_text())
        m2 = json.loads((again / "manifest.json").read_text())
        assert m1["outputs"] == m2["outputs"], f"{preset} replay diverged"
        for name, digest in m2["outputs"].items():
            assert sha256_file(again / name) == digest
    report(9, "determinism", "sweep bytes worker-independent; manifests replay")
