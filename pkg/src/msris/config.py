"""Experiment configuration: YAML schema, presets and unit conversion."""
from __future__ import annotations

import copy
from dataclasses import dataclass, field, fields
from pathlib import Path

import yaml

from .channel import PATTERN_KINDS
from .errors import ConfigError
from .model import Codebook

SCHEMA_DOC = """\
# msris experiment configuration (YAML).  Keys not given take the defaults shown.
experiment: sumrate       # scaling | sumrate
L: [2, 3, 6]              # sector counts to sweep
ML: [96, 120]             # total RIS antennas; each sweep point needs ML % (L*My) == 0
M: []                     # scaling only: fixed antennas-per-sector sweep (e.g. [32])
My: 4                     # UPA columns per sector (Mx = M / My); sumrate only
N: 6                      # transmit antennas (ULA)
K: 6                      # users, split evenly over the L sectors
P_T_dBm: 10               # transmit power; alternatively P_T_W (watts)
noise_dBm: -80            # per-user noise power
kappa_IT_dB: 0            # Rician factor transmitter-RIS ('inf' for pure LoS)
kappa_UI_dB: 0            # Rician factor RIS-users
patterns: [idealized, practical]
ris: [continuous]         # entries: continuous, or {A: bits, B: bits} for a codebook
frequency_hz: 2.4e9
d_IT: 100                 # metres
d_IU: 10                  # metres, all users
G_T: 1
G_U: 1
theta_IT: 0               # transmitter elevation seen from sector 1 (radians)
trials: 50                # channel realizations per sweep point (sumrate)
mc_draws: 10000           # user placements per point (scaling)
seed: 0                   # trial t uses seed + t
workers: 1                # process pool size; results do not depend on it
max_outer: 200
outer_rtol: 1.0e-4
out: results              # output directory
"""

PRESETS = {
    "fig6": {
        "experiment": "scaling", "L": [2, 3, 4, 5, 6], "M": [32], "ML": [180],
        "P_T_W": 1.0, "patterns": ["idealized", "practical"], "mc_draws": 10000,
    },
    "fig7": {
        "experiment": "sumrate", "L": [2, 3, 6], "ML": [48, 72, 96, 120, 144], "My": 4,
        "N": 6, "K": 6, "P_T_dBm": 10.0, "kappa_IT_dB": 0.0, "kappa_UI_dB": 0.0,
        "patterns": ["idealized", "practical"], "ris": ["continuous"],
    },
    "fig8": {
        "experiment": "sumrate", "L": [3], "ML": [48, 72, 96, 120, 144], "My": 4,
        "N": 6, "K": 6, "P_T_dBm": 10.0, "kappa_IT_dB": 0.0, "kappa_UI_dB": 0.0,
        "patterns": ["idealized", "practical"],
        "ris": [{"A": 1, "B": 1}, {"A": 2, "B": 2}, {"A": 3, "B": 3}, "continuous"],
    },
}


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


@dataclass(frozen=True)
class RisMode:
    """``continuous`` or a codebook resolution."""

    codebook: Codebook | None = None

    @property
    def name(self) -> str:
        return "continuous" if self.codebook is None else "discrete"

    @property
    def A(self):
        return None if self.codebook is None else self.codebook.A

    @property
    def B(self):
        return None if self.codebook is None else self.codebook.B

    @classmethod
    def parse(cls, entry) -> "RisMode":
        if entry == "continuous":
            return cls()
        if isinstance(entry, dict) and set(entry) <= {"A", "B", "mode"}:
            try:
                return cls(Codebook(int(entry["A"]), int(entry["B"])))
            except (KeyError, ValueError) as exc:
                raise ConfigError(f"bad codebook entry {entry!r}: {exc}") from None
        raise ConfigError(f"bad ris entry {entry!r}; use 'continuous' or {{A: .., B: ..}}")


def _db(v) -> float:
    if isinstance(v, str) and v.strip().lower() in ("inf", "+inf"):
        return float("inf")
    return float(v)


@dataclass(frozen=True)
class ScenarioConfig:
    experiment: str = "sumrate"
    L: tuple = (2, 3, 6)
    ML: tuple = (96, 120)
    M: tuple = ()
    My: int = 4
    N: int = 6
    K: int = 6
    P_T_W: float = dbm_to_watts(10.0)
    noise_W: float = dbm_to_watts(-80.0)
    kappa_IT_dB: float = 0.0
    kappa_UI_dB: float = 0.0
    patterns: tuple = ("idealized", "practical")
    ris: tuple = field(default_factory=lambda: (RisMode(),))
    frequency_hz: float = 2.4e9
    d_IT: float = 100.0
    d_IU: float = 10.0
    G_T: float = 1.0
    G_U: float = 1.0
    theta_IT: float = 0.0
    trials: int = 50
    mc_draws: int = 10000
    seed: int = 0
    workers: int = 1
    max_outer: int = 200
    outer_rtol: float = 1e-4
    out: str = "results"

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.experiment not in ("scaling", "sumrate"):
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        bad_l = [l for l in self.L if l < 2]
        if bad_l or not self.L:
            raise ConfigError(f"sector counts must be >= 2, got {list(self.L)}")
        for p in self.patterns:
            if p not in PATTERN_KINDS:
                raise ConfigError(f"unknown pattern {p!r}")
        if self.trials < 1 or self.mc_draws < 1 or self.workers < 1:
            raise ConfigError("trials, mc_draws and workers must be >= 1")
        if self.P_T_W <= 0 or self.noise_W <= 0:
            raise ConfigError("powers must be positive")
        if self.experiment == "scaling":
            bad = [(ml, l) for ml in self.ML for l in self.L if ml % l]
            if bad:
                raise ConfigError("ML not divisible by L at sweep points " + ", ".join(f"(ML={a}, L={b})" for a, b in bad))
            if not self.ML and not self.M:
                raise ConfigError("scaling needs an M or ML sweep")
        else:
            bad = [(ml, l) for ml in self.ML for l in self.L if ml % (l * self.My)]
            if bad:
                raise ConfigError(f"ML not divisible by L*My (My={self.My}) at sweep points "
                                  + ", ".join(f"(ML={a}, L={b})" for a, b in bad))
            bad_k = [l for l in self.L if self.K % l]
            if bad_k:
                raise ConfigError(f"K={self.K} users cannot be split evenly over L in {bad_k}")
            if not self.ML:
                raise ConfigError("sumrate needs an ML sweep")

    @classmethod
    def from_mapping(cls, raw: dict) -> "ScenarioConfig":
        raw = dict(raw)
        known = {f.name for f in fields(cls)} | {"P_T_dBm", "noise_dBm", "noise_W"}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kw = {}
        try:
            if "P_T_dBm" in raw and "P_T_W" in raw:
                raise ConfigError("give either P_T_dBm or P_T_W, not both")
            if "P_T_dBm" in raw:
                kw["P_T_W"] = dbm_to_watts(float(raw.pop("P_T_dBm")))
            if "noise_dBm" in raw:
                kw["noise_W"] = dbm_to_watts(float(raw.pop("noise_dBm")))
            for key in ("L", "ML", "M", "patterns"):
                if key in raw:
                    v = raw.pop(key)
                    v = tuple(v) if isinstance(v, (list, tuple)) else (v,)
                    kw[key] = v if key == "patterns" else tuple(int(x) for x in v)
            if "ris" in raw:
                v = raw.pop("ris")
                kw["ris"] = tuple(RisMode.parse(e) for e in (v if isinstance(v, list) else [v]))
            for key in ("kappa_IT_dB", "kappa_UI_dB"):
                if key in raw:
                    kw[key] = _db(raw.pop(key))
            for f in fields(cls):
                if f.name in raw:
                    kw[f.name] = type(f.default)(raw[f.name]) if isinstance(f.default, (int, float, str)) else raw[f.name]
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"bad config value: {exc}") from None
        return cls(**kw)


def load_config(path=None, preset: str | None = None, overrides: dict | None = None) -> ScenarioConfig:
    """Merge a preset, a YAML file and command-line overrides, in that order."""
    raw = {}
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
        raw.update(copy.deepcopy(PRESETS[preset]))
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        try:
            data = yaml.safe_load(text) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: invalid YAML: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be a mapping")
        if "P_T_dBm" in data:
            raw.pop("P_T_W", None)
        if "P_T_W" in data:
            raw.pop("P_T_dBm", None)
        raw.update(data)
    raw.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return ScenarioConfig.from_mapping(raw)
