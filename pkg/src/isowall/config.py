"""Scenario configuration: INI-style sections with a fixed, documented key set."""
from __future__ import annotations

import configparser
import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional


class ConfigError(ValueError):
    pass


@dataclass
class LatticeSection:
    V0: float = 0.2
    a: float = 2 * math.pi
    E0: float = -0.0818


@dataclass
class SusySection:
    alpha: Optional[float] = None
    normalization: str = "unit-max"
    chi_scale: float = 1.0


@dataclass
class GridSection:
    x_min: float = -3200.0
    x_max: float = 3200.0
    n_points: int = 32768


@dataclass
class PacketSection:
    x0: float = -100.0
    w: float = 40.0
    k0: float = 0.25


@dataclass
class EvolveSection:
    dt: Optional[float] = None
    t_final: Optional[float] = None
    snapshot_stride: int = 200
    edge_tol: float = 1e-6


@dataclass
class BandsSection:
    n_bands: int = 5
    n_k: int = 101


@dataclass
class OutputsSection:
    directory: str = "out"
    formats: str = "csv"
    x_stride: int = 16


SECTIONS = {
    "lattice": LatticeSection,
    "susy": SusySection,
    "grid": GridSection,
    "packet": PacketSection,
    "evolve": EvolveSection,
    "bands": BandsSection,
    "outputs": OutputsSection,
}


@dataclass
class ScenarioConfig:
    lattice: LatticeSection = field(default_factory=LatticeSection)
    susy: SusySection = field(default_factory=SusySection)
    grid: GridSection = field(default_factory=GridSection)
    packet: PacketSection = field(default_factory=PacketSection)
    evolve: EvolveSection = field(default_factory=EvolveSection)
    bands: BandsSection = field(default_factory=BandsSection)
    outputs: OutputsSection = field(default_factory=OutputsSection)

    def validate(self) -> "ScenarioConfig":
        for name in SECTIONS:
            sec = getattr(self, name)
            for f in fields(sec):
                v = getattr(sec, f.name)
                if isinstance(v, float) and not math.isfinite(v):
                    raise ConfigError(f"[{name}] {f.name} must be finite, got {v}")
        n = self.grid.n_points
        if n < 2 or n & (n - 1):
            raise ConfigError(f"[grid] n_points must be a power of two, got {n}")
        if not self.grid.x_min < 0 < self.grid.x_max:
            raise ConfigError("[grid] needs x_min < 0 < x_max")
        if not self.lattice.a > 0:
            raise ConfigError("[lattice] a must be positive")
        if self.susy.normalization not in ("unit-max", "unit-mean-square"):
            raise ConfigError(f"[susy] unknown normalization {self.susy.normalization!r}")
        if not self.susy.chi_scale > 0:
            raise ConfigError("[susy] chi_scale must be positive")
        if self.evolve.dt is not None and not self.evolve.dt > 0:
            raise ConfigError("[evolve] dt must be positive")
        if self.evolve.t_final is not None and not self.evolve.t_final > 0:
            raise ConfigError("[evolve] t_final must be positive")
        if self.evolve.snapshot_stride < 1 or self.outputs.x_stride < 1:
            raise ConfigError("strides must be >= 1")
        if self.outputs.formats != "csv":
            raise ConfigError(f"[outputs] only the csv format is supported, got {self.outputs.formats!r}")
        return self

    def as_dict(self) -> dict:
        return asdict(self)


def _coerce(section: str, key: str, raw: str, annotation):
    text = raw.strip()
    if "Optional" in str(annotation) and text.lower() in ("", "none", "auto"):
        return None
    try:
        if "int" in str(annotation):
            return int(text)
        if "float" in str(annotation):
            return float(eval_number(text))
        return text
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key}: cannot parse {raw!r}") from exc


def eval_number(text: str) -> float:
    """Floats, plus the 'pi' shorthand ('2pi', '2*pi') for periods."""
    t = text.replace(" ", "").lower()
    if t.endswith("pi"):
        head = t[:-2].rstrip("*")
        return (float(head) if head else 1.0) * math.pi
    return float(t)


def from_dict(data: dict) -> ScenarioConfig:
    cfg = ScenarioConfig()
    for name, values in data.items():
        if name not in SECTIONS:
            raise ConfigError(f"unknown section [{name}]")
        sec = getattr(cfg, name)
        known = {f.name: f for f in fields(sec)}
        for key, value in values.items():
            if key not in known:
                raise ConfigError(f"unknown key {key!r} in [{name}]")
            if isinstance(value, str):
                value = _coerce(name, key, value, known[key].type)
            setattr(sec, key, value)
    return cfg.validate()


def load_config(path) -> ScenarioConfig:
    """Read an INI scenario file, or the config echoed inside a run manifest (.json)."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} does not exist")
    if path.suffix == ".json":
        with open(path) as fh:
            return from_dict(json.load(fh)["config"])
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read(path)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    return from_dict({s: dict(parser.items(s)) for s in parser.sections()})
