"""Scenario execution: compute, write data files, record a manifest.

Every run produces a ``manifest.json`` holding the fully resolved
scenario, the library version and a sha256 checksum per output file.
The manifest doubles as a config: ``ionchaos run manifest.json``
replays the run and must reproduce the checksums byte for byte.
Multi-epsilon scenarios may compute in parallel; files are always
written in epsilon order by the parent process, so the output bytes do
not depend on the worker count.
"""

import os
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .classical import ClassicalState, integrate_cartesian, poincare_section
from .csvio import sha256_file, write_csv, write_json
from .presets import Scenario, scenario_to_config
from .quantum import ground_state, h_lo_expect, probabilities, propagate, xi_squared_expect
from .raman import (
    ComplexFieldVector,
    coupling_h,
    kappa_matrix,
    lambda_tensor,
    lambda_tensor_from_3j,
)
from .spectral import ChaosScanScenario, TimeSeries, chaos_scan, power_spectrum


def _eps_tag(eps):
    return f"{eps:g}"


def _scenario_meta(s: Scenario, eps):
    return {
        "generator": f"ionchaos {__version__}",
        "scenario": s.name,
        "kind": s.kind,
        "epsilon": float(eps),
        "eta": s.eta,
        "N": s.N,
        "delta": s.delta,
        "rtol": s.rtol,
        "atol": s.atol,
    }


def _classical_trajectory_files(s: Scenario, eps):
    p = s.params(eps)
    traj = integrate_cartesian(
        ClassicalState(s.xi0, s.v0, 0.0), p, s.tau_end, s.dtau_out,
        rtol=s.rtol, atol=s.atol,
    )
    meta = _scenario_meta(s, eps)
    meta.update(xi0=s.xi0, v0=s.v0, tau_end=s.tau_end, dtau_out=s.dtau_out)
    rows = np.column_stack([traj.tau, traj.xi, traj.v])
    return [(f"{s.name}_eps{_eps_tag(eps)}.csv", ("tau", "xi", "v"), rows, meta)]


def _poincare_files(s: Scenario, eps):
    p = s.params(eps)
    inits = [ClassicalState(xi, v, 0.0) for xi, v in s.initial_conditions]
    sets = poincare_section(
        inits, p, s.n_periods, phase_offset=s.phase_offset,
        rtol=s.rtol, atol=s.atol,
    )
    out = []
    for i, ps in enumerate(sets):
        if ps.error is not None:
            raise RuntimeError(
                f"poincare trajectory {i} (init {s.initial_conditions[i]}) failed: {ps.error}"
            )
        meta = _scenario_meta(s, eps)
        meta.update(
            xi0=s.initial_conditions[i][0], v0=s.initial_conditions[i][1],
            n_periods=s.n_periods, phase_offset=s.phase_offset,
            drive_period=ps.drive_period,
        )
        rows = np.column_stack([ps.times, ps.xi, ps.v])
        out.append((f"{s.name}_eps{_eps_tag(eps)}_ic{i}.csv", ("tau", "xi", "v"), rows, meta))
    return out


def _classical_spectrum_files(s: Scenario, eps):
    p = s.params(eps)
    traj = integrate_cartesian(
        ClassicalState(s.xi0, s.v0, 0.0), p, s.tau_end, s.dtau_out,
        rtol=s.rtol, atol=s.atol,
    )
    spec = power_spectrum(TimeSeries(traj.xi, s.dtau_out), window=s.window)
    meta = _scenario_meta(s, eps)
    meta.update(xi0=s.xi0, v0=s.v0, tau_end=s.tau_end, dtau_out=s.dtau_out,
                window=s.window, signal="xi")
    rows = np.column_stack([spec.frequencies, spec.power])
    return [(f"{s.name}_eps{_eps_tag(eps)}.csv", ("nu", "power"), rows, meta)]


def _quantum_history(s: Scenario, eps):
    p = s.params(eps)
    states = propagate(
        ground_state(s.nmax, s.eta), p, s.tau_end, s.dtau_out,
        nmax=s.nmax, rtol=s.rtol, atol=s.atol,
    )
    taus = np.array([st.tau for st in states])
    probs = np.column_stack(
        [np.array([probabilities(st)[n] for st in states]) for n in range(s.k_levels + 1)]
    )
    xi2 = np.array([xi_squared_expect(st) for st in states])
    hlo = np.array([h_lo_expect(st) for st in states])
    return taus, probs, xi2, hlo


def _state_history_files(s: Scenario, eps):
    taus, probs, xi2, hlo = _quantum_history(s, eps)
    meta = _scenario_meta(s, eps)
    meta.update(nmax=s.nmax, tau_end=s.tau_end, dtau_out=s.dtau_out,
                initial_state="ground")
    cols = ["tau"] + [f"P_{n}" for n in range(s.k_levels + 1)] + ["xi2", "h_lo"]
    rows = np.column_stack([taus, probs, xi2, hlo])
    return [(f"{s.name}_eps{_eps_tag(eps)}.csv", tuple(cols), rows, meta)]


def _quantum_spectrum_files(s: Scenario, eps):
    taus, probs, xi2, hlo = _quantum_history(s, eps)
    series = probs[:, 0] if s.signal == "p0" else xi2
    spec = power_spectrum(TimeSeries(series, s.dtau_out), window=s.window)
    meta = _scenario_meta(s, eps)
    meta.update(nmax=s.nmax, tau_end=s.tau_end, dtau_out=s.dtau_out,
                window=s.window, signal=s.signal, initial_state="ground")
    rows = np.column_stack([spec.frequencies, spec.power])
    return [(f"{s.name}_eps{_eps_tag(eps)}.csv", ("nu", "power"), rows, meta)]


_KIND_RUNNERS = {
    "classical-trajectory": _classical_trajectory_files,
    "poincare": _poincare_files,
    "classical-spectrum": _classical_spectrum_files,
    "quantum-probabilities": _state_history_files,
    "expectation-values": _state_history_files,
    "quantum-spectrum": _quantum_spectrum_files,
}


def _run_eps_job(s: Scenario, eps):
    return _KIND_RUNNERS[s.kind](s, eps)


def run_scenario(s: Scenario, out_dir, workers=1, fmt="csv"):
    """Execute a scenario; returns the manifest dictionary."""
    os.makedirs(out_dir, exist_ok=True)
    if s.kind == "raman-check":
        files = [("raman_check.json", None, raman_check_payload(), None)]
    elif s.kind == "chaos-scan":
        files = [_chaos_scan_file(s, workers)]
    else:
        jobs = list(s.epsilons)
        if workers > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                futures = [pool.submit(_run_eps_job, s, e) for e in jobs]
                per_eps = [f.result() for f in futures]
        else:
            per_eps = [_run_eps_job(s, e) for e in jobs]
        files = [item for group in per_eps for item in group]

    outputs = {}
    for item in files:
        name, columns, payload, meta = item
        path = os.path.join(out_dir, name)
        if columns is None:
            write_json(path, payload)
        elif fmt == "json":
            name = name[:-4] + ".json" if name.endswith(".csv") else name
            path = os.path.join(out_dir, name)
            write_json(path, {
                "meta": meta,
                "columns": list(columns),
                "rows": [[float(v) for v in row] for row in payload],
            })
        else:
            write_csv(path, columns, payload, meta=meta)
        outputs[name] = sha256_file(path)

    manifest = {
        "artifact": "ionchaos",
        "version": __version__,
        "name": s.name,
        "format": fmt,
        "scenario": scenario_to_config(s),
        "outputs": outputs,
    }
    write_json(os.path.join(out_dir, "manifest.json"), manifest)
    return manifest


def _chaos_scan_file(s: Scenario, workers):
    sc = ChaosScanScenario(
        eta=s.eta, N=s.N, delta=s.delta, xi0=s.xi0, v0=s.v0,
        tau_spectrum=s.tau_spectrum, dtau_out=s.scan_dtau_out,
        tau_lyapunov=s.tau_lyapunov, window=s.window, rtol=s.rtol, atol=s.atol,
    )
    rows = chaos_scan(s.epsilons, sc, workers=workers)
    failures = [r for r in rows if r.error is not None]
    meta = {
        "generator": f"ionchaos {__version__}",
        "scenario": s.name,
        "kind": s.kind,
        "eta": s.eta, "N": s.N, "delta": s.delta,
        "xi0": s.xi0, "v0": s.v0,
        "tau_spectrum": s.tau_spectrum, "tau_lyapunov": s.tau_lyapunov,
        "dtau_out": s.scan_dtau_out, "window": s.window,
        "rtol": s.rtol, "atol": s.atol,
        "failures": len(failures),
    }
    data = [(r.epsilon, r.lyapunov, r.spectral_entropy) for r in rows]
    return (f"{s.name}.csv", ("epsilon", "lyapunov", "spectral_entropy"), data, meta)


def raman_check_payload():
    """Coupling tensors, their brute-force cross-check, and field-level identities."""

    def c2pair(m):
        return {"re": np.real(m).tolist(), "im": np.imag(m).tolist()}

    tensors = {}
    worst = 0.0
    for mu in (1, 2):
        for nu in (1, 2):
            closed = lambda_tensor(mu, nu)
            brute = lambda_tensor_from_3j(mu, nu)
            tensors[f"{mu}{nu}"] = c2pair(closed)
            worst = max(worst, float(np.max(np.abs(closed - brute))))

    rng = np.random.default_rng(20240901)
    herm = 0.0
    z_h = 0.0
    for _ in range(200):
        f = ComplexFieldVector(*(rng.normal(size=3) + 1j * rng.normal(size=3)))
        k = kappa_matrix(f)
        herm = max(herm, float(abs(k[0, 1] - np.conj(k[1, 0]))))
        fz = ComplexFieldVector(0.0, 0.0, complex(rng.normal(), rng.normal()))
        h = coupling_h(fz)
        z_h = max(z_h, abs(h.h1), abs(h.h2), abs(h.h3))
    return {
        "lambda_tensors": tensors,
        "closed_vs_3j_sum_max_abs_diff": worst,
        "kappa_hermiticity_max_defect": herm,
        "z_polarized_h123_max": z_h,
        "random_fields": 200,
    }
