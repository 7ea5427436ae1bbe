"""Run configuration: TOML or JSON documents validated into a :class:`RunConfig`."""
from __future__ import annotations

import copy
import json
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError
from .models import TOPOLOGIES, CouplingProfile, build_ising, build_mbody_target, build_xz_target
from .noise import NoiseSpec
from .pauli import SpinHamiltonian, basis_state

EXPERIMENTS = ("fidelity", "totals", "blocks", "couplings")
SWEEP_VARS = ("n_T", "dt", "n_qubits")
RUN_MODES = ("sdaqc", "bdaqc", "dqc")
TARGET_KINDS = ("ising", "xz", "mbody", "explicit")
DQC_MODES = ("direct-ATA", "nn-swap", "optimised")
PRESETS = ("figure5", "figure6a", "figure6b", "figure7", "figure8", "figure9")

DEFAULTS: dict[str, Any] = {
    "experiment": "fidelity",
    "system": {"n_qubits": 5, "topology": "ATA"},
    "resource": {"kind": "polynomial", "J": 0.5, "alpha": 2.5},
    "target": {"kind": "xz", "profile": {"kind": "polynomial", "J": 0.5, "alpha": 0.5}},
    "run": {
        "t_F": 2.0,
        "n_T": [10],
        "dt": [0.004],
        "modes": ["sdaqc"],
        "dqc_mode": "direct-ATA",
        "initial_state": "ddudd",
        "symmetrized": False,
        "allow_fallback": False,
        "sweep": "n_T",
        "n_qubits": [],
    },
    "noise": {"enabled": False, "sigma_d": 0.009, "r_u": 0.002, "r_b": 0.9, "r_s": None,
              "dt": 0.004, "seed": 0, "runs": 1000, "raw_csv": False},
    "output": {"dir": "out", "plot": False},
    "extra_resources": [],
}


def _merge(base: dict, over: Mapping) -> dict:
    out = copy.deepcopy(base)
    for key, value in over.items():
        if isinstance(value, Mapping) and isinstance(out.get(key), dict) and key not in ("profile", "terms"):
            out[key] = _merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def _as_list(value, cast) -> list:
    items = value if isinstance(value, (list, tuple)) else [value]
    try:
        return [cast(v) for v in items]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad list entry in {value!r}: {exc}") from None


@dataclass
class RunConfig:
    experiment: str
    n_qubits: int
    topology: str
    resource: CouplingProfile
    target: dict
    t_F: float
    n_T: list[int]
    dt: list[float]
    modes: list[str]
    dqc_mode: str
    initial_state: str
    symmetrized: bool
    allow_fallback: bool
    sweep: str
    n_qubits_list: list[int]
    noise: NoiseSpec
    noise_enabled: bool
    raw_csv: bool
    out_dir: str
    plot: bool
    source: dict = field(default_factory=dict, repr=False)

    # -- construction -----------------------------------------------------
    @classmethod
    def from_dict(cls, doc: Mapping) -> "RunConfig":
        if not isinstance(doc, Mapping):
            raise ConfigError("configuration must be a table")
        unknown = set(doc) - set(DEFAULTS) - {"name", "description"}
        if unknown:
            raise ConfigError(f"unknown configuration sections: {sorted(unknown)}")
        d = _merge(DEFAULTS, doc)
        try:
            return cls._build(d)
        except ConfigError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid configuration: {exc}") from None

    @classmethod
    def _build(cls, d: dict) -> "RunConfig":
        exp = d["experiment"]
        if exp not in EXPERIMENTS:
            raise ConfigError(f"experiment must be one of {EXPERIMENTS}, got {exp!r}")
        sysd, run, nz, outd = d["system"], d["run"], d["noise"], d["output"]
        n = int(sysd["n_qubits"])
        if not 2 <= n <= 12:
            raise ConfigError("n_qubits must be between 2 and 12")
        topology = str(sysd.get("topology", "ATA"))
        if topology not in TOPOLOGIES:
            raise ConfigError(f"topology must be one of {TOPOLOGIES}")
        resource = CouplingProfile.from_dict(d["resource"])
        target = dict(d["target"])
        if target.get("kind") not in TARGET_KINDS:
            raise ConfigError(f"target.kind must be one of {TARGET_KINDS}")
        t_F = float(run["t_F"])
        if not t_F > 0:
            raise ConfigError("t_F must be positive")
        n_T = _as_list(run["n_T"], int)
        if not n_T or min(n_T) < 1:
            raise ConfigError("n_T values must be positive integers")
        dts = _as_list(run["dt"], float)
        if not dts or min(dts) <= 0:
            raise ConfigError("dt values must be positive")
        modes = _as_list(run["modes"], str)
        bad = [m for m in modes if m not in RUN_MODES]
        if bad or not modes:
            raise ConfigError(f"modes must be a non-empty subset of {RUN_MODES}")
        dqc_mode = str(run["dqc_mode"])
        if dqc_mode not in DQC_MODES:
            raise ConfigError(f"dqc_mode must be one of {DQC_MODES}")
        sweep = str(run["sweep"])
        if sweep not in SWEEP_VARS:
            raise ConfigError(f"sweep must be one of {SWEEP_VARS}")
        n_list = _as_list(run.get("n_qubits") or [n], int)
        if min(n_list) < 2 or max(n_list) > 12:
            raise ConfigError("swept n_qubits must lie in 2..12")
        state = str(run["initial_state"])
        try:
            basis_state(n, state if not state.isdigit() else int(state))
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"bad initial_state: {exc}") from None
        try:
            noise = NoiseSpec(
                sigma_d=float(nz["sigma_d"]), r_u=float(nz["r_u"]), r_b=float(nz["r_b"]),
                r_s=None if nz.get("r_s") is None else float(nz["r_s"]),
                dt=float(nz["dt"]), seed=int(nz["seed"]), runs=int(nz["runs"]),
            )
        except ValueError as exc:
            raise ConfigError(f"bad noise section: {exc}") from None
        cfg = cls(
            experiment=exp, n_qubits=n, topology=topology, resource=resource, target=target,
            t_F=t_F, n_T=n_T, dt=dts, modes=modes, dqc_mode=dqc_mode, initial_state=state,
            symmetrized=bool(run["symmetrized"]), allow_fallback=bool(run["allow_fallback"]),
            sweep=sweep, n_qubits_list=n_list, noise=noise, noise_enabled=bool(nz["enabled"]),
            raw_csv=bool(nz.get("raw_csv", False)), out_dir=str(outd["dir"]), plot=bool(outd.get("plot", False)),
            source=d,
        )
        cfg.build_target(n)  # fail early on a malformed target
        return cfg

    # -- derived objects -------------------------------------------------------
    def build_resource(self, n: int | None = None) -> SpinHamiltonian:
        return build_ising(n or self.n_qubits, self.resource, self.topology)

    def build_target(self, n: int | None = None) -> SpinHamiltonian:
        n = n or self.n_qubits
        t = self.target
        kind = t["kind"]
        profile = CouplingProfile.from_dict(t.get("profile", {}))
        topology = t.get("topology", self.topology)
        if kind == "ising":
            return build_ising(n, profile, topology)
        if kind == "xz":
            return build_xz_target(n, profile, topology)
        if kind == "mbody":
            return build_mbody_target(n, int(t.get("body", 4)), seed=int(t.get("seed", 0)), J=profile.J)
        terms = t.get("terms")
        if not isinstance(terms, Mapping):
            raise ConfigError("explicit target needs a [target.terms] table")
        return SpinHamiltonian(n, {str(w): float(c) for w, c in terms.items()})

    def initial_psi(self, n: int | None = None):
        n = n or self.n_qubits
        s = self.initial_state
        if s.isdigit():
            return basis_state(n, int(s))
        if len(s) != n:
            # extend the pattern by centring a single excitation
            return basis_state(n, "".join("u" if i == n // 2 else "d" for i in range(n)))
        return basis_state(n, s)

    def resolved(self) -> dict:
        """Fully expanded configuration, suitable for writing next to results."""
        d = copy.deepcopy(self.source)
        d["resource"] = self.resource.to_dict()
        d["noise"] = {**self.noise.to_dict(), "enabled": self.noise_enabled, "raw_csv": self.raw_csv}
        d["run"].update({"n_T": self.n_T, "dt": self.dt, "n_qubits": self.n_qubits_list})
        return d

    def apply_overrides(self, seed=None, runs=None, no_noise=False, allow_fallback=False, out=None) -> "RunConfig":
        if seed is not None:
            if not 0 <= seed < 2**64:
                raise ConfigError("seed must be an unsigned 64-bit integer")
            self.noise.seed = int(seed)
        if runs is not None:
            if runs < 1:
                raise ConfigError("runs must be at least 1")
            self.noise.runs = int(runs)
        if no_noise:
            self.noise_enabled = False
        if allow_fallback:
            self.allow_fallback = True
        if out is not None:
            self.out_dir = str(out)
        return self


def parse_text(text: str, suffix: str = ".toml") -> dict:
    try:
        if suffix == ".json":
            return json.loads(text)
        return tomllib.loads(text)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot parse configuration: {exc}") from None


def preset_text(name: str) -> str:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}")
    return resources.files("daqc").joinpath("presets", f"{name}.toml").read_text()


def load_config(path_or_preset: str | Path) -> RunConfig:
    """Read a TOML/JSON file, or a bundled preset by name (``figure6a`` ...)."""
    p = Path(path_or_preset)
    if p.exists():
        doc = parse_text(p.read_text(), p.suffix.lower())
    elif str(path_or_preset) in PRESETS:
        doc = parse_text(preset_text(str(path_or_preset)))
    else:
        raise ConfigError(f"configuration file {str(path_or_preset)!r} not found")
    return RunConfig.from_dict(doc)
