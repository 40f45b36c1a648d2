"""Scenario model and the built-in figure-data presets.

A scenario is everything one `run` needs: the kind of computation, the
model parameters, the drive-strength list, initial conditions, time
grid and numerical options.  Presets are plain config dictionaries (the
same shape a TOML config parses into), so a run manifest can embed the
fully resolved scenario and be replayed as a config file later.
"""

from dataclasses import dataclass
import math

from .config import ConfigError
from .params import DimensionlessParams, PhysicalConfig, derive_dimensionless

KINDS = (
    "classical-trajectory",
    "poincare",
    "classical-spectrum",
    "quantum-probabilities",
    "quantum-spectrum",
    "expectation-values",
    "chaos-scan",
    "raman-check",
)

QUANTUM_KINDS = ("quantum-probabilities", "quantum-spectrum", "expectation-values")


@dataclass(frozen=True)
class Scenario:
    kind: str
    name: str
    epsilons: tuple
    eta: float = 0.45
    N: int = 4
    delta: float = 0.01
    physical: dict = None           # remembered when params came from SI input
    # classical options
    xi0: float = 0.0
    v0: float = 0.0
    tau_end: float = 100.0
    dtau_out: float = 0.05
    initial_conditions: tuple = ()
    n_periods: int = 200
    phase_offset: float = 0.0
    # quantum options
    nmax: int = 200
    k_levels: int = 5
    signal: str = "p0"
    # spectra and scans
    window: str = "hann"
    tau_spectrum: float = 100.0
    tau_lyapunov: float = 500.0
    scan_dtau_out: float = 0.05
    # integration
    rtol: float = 1e-10
    atol: float = 1e-12

    def params(self, epsilon) -> DimensionlessParams:
        return DimensionlessParams(epsilon=float(epsilon), eta=self.eta,
                                   N=self.N, delta=self.delta)

    def validate(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown scenario kind {self.kind!r}; expected one of {KINDS}")
        if self.kind != "raman-check" and len(self.epsilons) == 0:
            raise ConfigError("scenario needs a nonempty epsilons list")
        if any(e < 0 for e in self.epsilons):
            raise ConfigError("epsilon values must be >= 0")
        if self.kind == "chaos-scan" and list(self.epsilons) != sorted(self.epsilons):
            raise ConfigError("chaos-scan epsilon grid must be sorted ascending")
        if self.tau_end <= 0 or self.dtau_out <= 0:
            raise ConfigError("time grid must be positive: tau_end > 0, dtau_out > 0")
        if self.kind == "poincare" and len(self.initial_conditions) == 0:
            raise ConfigError("poincare scenario needs initial_conditions")
        if self.signal not in ("p0", "xi2"):
            raise ConfigError(f"signal must be 'p0' or 'xi2', got {self.signal!r}")
        if self.kind in QUANTUM_KINDS and self.eta <= 0:
            raise ConfigError("quantum scenarios require eta > 0")
        return self


def scenario_from_config(doc, name=None) -> Scenario:
    """Build a validated Scenario from a config dictionary.

    Model parameters come either from [params] (dimensionless) or from
    [physical] (SI, converted with paper-style defaults for any field
    left out).  A chaos-scan grid may be given as [scan] start/stop/step
    instead of an explicit epsilons list.
    """
    if "scenario" in doc and isinstance(doc["scenario"], dict):
        doc = doc["scenario"]
    known = {"kind", "name", "epsilons", "params", "physical", "classical",
             "quantum", "spectrum", "scan", "integration"}
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    kind = doc.get("kind")
    if kind is None:
        raise ConfigError("config must set 'kind'")

    fields = {"kind": kind, "name": name or doc.get("name", kind)}

    params = doc.get("params", {})
    physical = doc.get("physical")
    if physical is not None:
        try:
            cfg = PhysicalConfig(**physical)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"[physical]: {exc}") from None
        derived = derive_dimensionless(cfg, N=params.get("N"))
        fields.update(eta=derived.eta, N=derived.N, delta=derived.delta,
                      physical=dict(physical))
        base_eps = derived.epsilon
    else:
        base_eps = params.get("epsilon", 0.0)
    for key in ("eta", "N", "delta"):
        if key in params:
            fields[key] = params[key]

    eps = doc.get("epsilons")
    scan = dict(doc.get("scan", {}))
    if eps is None and {"epsilon_start", "epsilon_stop", "epsilon_step"} <= set(scan):
        start, stop, step = (scan["epsilon_start"], scan["epsilon_stop"],
                             scan["epsilon_step"])
        if step <= 0 or stop <= start:
            raise ConfigError("scan range must have step > 0 and stop > start")
        n = int(math.floor((stop - start) / step + 1e-9))
        eps = [start + k * step for k in range(n + 1)]
    if eps is None:
        eps = [base_eps] if kind != "raman-check" else []
    if not isinstance(eps, (list, tuple)):
        raise ConfigError("epsilons must be a list")
    fields["epsilons"] = tuple(float(e) for e in eps)

    classical = dict(doc.get("classical", {}))
    if "initial_conditions" in classical:
        ics = classical.pop("initial_conditions")
        try:
            fields["initial_conditions"] = tuple((float(a), float(b)) for a, b in ics)
        except (TypeError, ValueError):
            raise ConfigError("initial_conditions must be a list of [xi, v] pairs") from None
    for key in ("xi0", "v0", "tau_end", "dtau_out", "n_periods", "phase_offset"):
        if key in classical:
            fields[key] = classical.pop(key)
    if classical:
        raise ConfigError(f"unknown [classical] keys: {sorted(classical)}")

    quantum = dict(doc.get("quantum", {}))
    for key in ("nmax", "k_levels", "signal"):
        if key in quantum:
            fields[key] = quantum.pop(key)
    for key in ("tau_end", "dtau_out"):
        if key in quantum:
            fields[key] = quantum.pop(key)
    if quantum:
        raise ConfigError(f"unknown [quantum] keys: {sorted(quantum)}")

    spectrum = dict(doc.get("spectrum", {}))
    if "window" in spectrum:
        fields["window"] = spectrum.pop("window")
    if spectrum:
        raise ConfigError(f"unknown [spectrum] keys: {sorted(spectrum)}")

    for key in ("tau_spectrum", "tau_lyapunov"):
        if key in scan:
            fields[key] = scan.pop(key)
    if "dtau_out" in scan:
        fields["scan_dtau_out"] = scan.pop("dtau_out")
    scan.pop("epsilon_start", None)
    scan.pop("epsilon_stop", None)
    scan.pop("epsilon_step", None)
    if scan:
        raise ConfigError(f"unknown [scan] keys: {sorted(scan)}")

    integration = dict(doc.get("integration", {}))
    for key in ("rtol", "atol"):
        if key in integration:
            fields[key] = integration.pop(key)
    if integration:
        raise ConfigError(f"unknown [integration] keys: {sorted(integration)}")

    try:
        scenario = Scenario(**fields)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    return scenario.validate()


def scenario_to_config(s: Scenario):
    """Fully resolved config dict; embedding it in a manifest makes runs replayable."""
    doc = {
        "kind": s.kind,
        "name": s.name,
        "epsilons": list(s.epsilons),
        "params": {"eta": s.eta, "N": s.N, "delta": s.delta},
        "classical": {
            "xi0": s.xi0, "v0": s.v0, "tau_end": s.tau_end, "dtau_out": s.dtau_out,
            "initial_conditions": [list(ic) for ic in s.initial_conditions],
            "n_periods": s.n_periods, "phase_offset": s.phase_offset,
        },
        "quantum": {"nmax": s.nmax, "k_levels": s.k_levels, "signal": s.signal},
        "spectrum": {"window": s.window},
        "scan": {"tau_spectrum": s.tau_spectrum, "tau_lyapunov": s.tau_lyapunov,
                 "dtau_out": s.scan_dtau_out},
        "integration": {"rtol": s.rtol, "atol": s.atol},
    }
    if s.physical is not None:
        doc["physical"] = dict(s.physical)
    if s.kind in QUANTUM_KINDS:
        doc["quantum"]["tau_end"] = s.tau_end
        doc["quantum"]["dtau_out"] = s.dtau_out
    return doc


# Seven initial conditions on a radial fan along the xi axis.  The
# multi-trajectory section panels need a documented, reproducible set
# of starting points covering the island structure out to the chaotic
# sea; this fan is that reconstruction.
RADIAL_FAN = [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [3.0, 0.0],
              [4.0, 0.0], [5.0, 0.0], [6.0, 0.0]]

_BASE_PARAMS = {"eta": 0.45, "N": 4, "delta": 0.01}

PRESETS = {
    "fig4a": {
        "kind": "poincare",
        "description": "Phase-space sections for eps = 2, 2.5, 3, 4 (seven-point radial fan)",
        "epsilons": [2.0, 2.5, 3.0, 4.0],
        "params": dict(_BASE_PARAMS),
        "classical": {"initial_conditions": RADIAL_FAN, "n_periods": 200},
    },
    "fig4b": {
        "kind": "poincare",
        "description": "Phase-space sections for eps = 5, 8, 10, 20 (seven-point radial fan)",
        "epsilons": [5.0, 8.0, 10.0, 20.0],
        "params": dict(_BASE_PARAMS),
        "classical": {"initial_conditions": RADIAL_FAN, "n_periods": 200},
    },
    "fig5": {
        "kind": "classical-trajectory",
        "description": "xi(tau) from the origin for eps = 0, 0.5, 1, 2, 5, 8, tau <= 100",
        "epsilons": [0.0, 0.5, 1.0, 2.0, 5.0, 8.0],
        "params": dict(_BASE_PARAMS),
        "classical": {"xi0": 0.0, "v0": 0.0, "tau_end": 100.0, "dtau_out": 0.05},
    },
    "fig6": {
        "kind": "classical-trajectory",
        "description": "Chaotic xi(tau) from the origin for eps = 10, 20, 30, 40, tau <= 100",
        "epsilons": [10.0, 20.0, 30.0, 40.0],
        "params": dict(_BASE_PARAMS),
        "classical": {"xi0": 0.0, "v0": 0.0, "tau_end": 100.0, "dtau_out": 0.05},
    },
    "fig7": {
        "kind": "classical-spectrum",
        "description": "Power spectrum of xi(tau) for eps = 0, 0.5, 1, 2, 5, 8",
        "epsilons": [0.0, 0.5, 1.0, 2.0, 5.0, 8.0],
        "params": dict(_BASE_PARAMS),
        "classical": {"xi0": 0.0, "v0": 0.0, "tau_end": 100.0, "dtau_out": 0.05},
    },
    "fig8": {
        "kind": "classical-spectrum",
        "description": "Power spectrum of chaotic xi(tau) for eps = 10, 20, 30, 40",
        "epsilons": [10.0, 20.0, 30.0, 40.0],
        "params": dict(_BASE_PARAMS),
        "classical": {"xi0": 0.0, "v0": 0.0, "tau_end": 100.0, "dtau_out": 0.05},
    },
    "fig9": {
        "kind": "quantum-probabilities",
        "description": "P_n(tau), n <= 5, ground-state start, eps = 0, 0.5, 1, 1.5, 2",
        "epsilons": [0.0, 0.5, 1.0, 1.5, 2.0],
        "params": dict(_BASE_PARAMS),
        "quantum": {"k_levels": 5, "tau_end": 15.0, "dtau_out": 0.01},
    },
    "fig10": {
        "kind": "quantum-probabilities",
        "description": "P_n(tau), n <= 3, ground-state start, eps = 3, 5, 7.5",
        "epsilons": [3.0, 5.0, 7.5],
        "params": dict(_BASE_PARAMS),
        "quantum": {"k_levels": 3, "tau_end": 15.0, "dtau_out": 0.01},
    },
    "fig11": {
        "kind": "quantum-probabilities",
        "description": "P_0(tau) over tau <= 30 for eps = 1, 5, 7.5, 8",
        "epsilons": [1.0, 5.0, 7.5, 8.0],
        "params": dict(_BASE_PARAMS),
        "quantum": {"k_levels": 0, "tau_end": 30.0, "dtau_out": 0.01},
    },
    "fig12": {
        "kind": "quantum-spectrum",
        "description": "Power spectrum of P_0(tau) for eps = 1, 5, 7.5, 8",
        "epsilons": [1.0, 5.0, 7.5, 8.0],
        "params": dict(_BASE_PARAMS),
        "quantum": {"signal": "p0", "tau_end": 30.0, "dtau_out": 0.01},
    },
    "fig13": {
        "kind": "expectation-values",
        "description": "<xi^2>(tau) and <H_LO>(tau) for eps = 3, 5, 7.5, 8",
        "epsilons": [3.0, 5.0, 7.5, 8.0],
        "params": dict(_BASE_PARAMS),
        "quantum": {"k_levels": 0, "tau_end": 30.0, "dtau_out": 0.01},
    },
    "fig14": {
        "kind": "quantum-spectrum",
        "description": "Power spectrum of <xi^2>(tau) for eps = 1, 5, 7.5, 8",
        "epsilons": [1.0, 5.0, 7.5, 8.0],
        "params": dict(_BASE_PARAMS),
        "quantum": {"signal": "xi2", "tau_end": 30.0, "dtau_out": 0.01},
    },
    "fig15": {
        "kind": "expectation-values",
        "description": "<xi^2> and <H_LO> in the regular regime, eps = 0, 0.5, 2, tau <= 15",
        "epsilons": [0.0, 0.5, 2.0],
        "params": dict(_BASE_PARAMS),
        "quantum": {"k_levels": 0, "tau_end": 15.0, "dtau_out": 0.01},
    },
    "fig16": {
        "kind": "expectation-values",
        "description": "<xi^2> and <H_LO> toward the chaotic regime, eps = 3, 5, 7.5, 8, tau <= 15",
        "epsilons": [3.0, 5.0, 7.5, 8.0],
        "params": dict(_BASE_PARAMS),
        "quantum": {"k_levels": 0, "tau_end": 15.0, "dtau_out": 0.01},
    },
    "scan-fig5": {
        "kind": "chaos-scan",
        "description": "Lyapunov exponent and spectral entropy on the eps grid of fig5",
        "epsilons": [0.0, 0.5, 1.0, 2.0, 5.0, 8.0],
        "params": dict(_BASE_PARAMS),
        "scan": {"tau_spectrum": 100.0, "tau_lyapunov": 500.0, "dtau_out": 0.05},
    },
    "scan-onset": {
        "kind": "chaos-scan",
        "description": "Chaos-onset scan, eps = 0..20 in steps of 0.5",
        "params": dict(_BASE_PARAMS),
        "scan": {"epsilon_start": 0.0, "epsilon_stop": 20.0, "epsilon_step": 0.5,
                 "tau_spectrum": 100.0, "tau_lyapunov": 500.0, "dtau_out": 0.05},
    },
    "raman-check": {
        "kind": "raman-check",
        "description": "Coupling tensors and their angular-momentum-sum cross-check",
    },
}


def preset_config(name):
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; try `ionchaos list-presets`")
    doc = {k: v for k, v in PRESETS[name].items() if k != "description"}
    return doc


def preset_scenario(name) -> Scenario:
    return scenario_from_config(preset_config(name), name=name)
