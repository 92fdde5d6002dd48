"""Run configuration: file format, defaults, hashing.

Configurations live in flat key = value files with sections (INI style);
a JSON object with the same field names is accepted as an alternative.
Every run derives from one ExperimentConfig, and the short hash of its
canonical form is stamped into every output file header so results can
be traced back to their inputs.
"""

from __future__ import annotations

import configparser
import dataclasses
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError
from .evolve import IntegratorConfig
from .lattice import LadderSpec

DEFAULT_RATES = (1.0, 5.0, 10.0, 20.0, 40.0, 80.0, 150.0)
DEFAULT_EPSILONS = (0.25, 0.375, 0.5)

# (section, key) -> dataclass field for the INI layout
_INI_MAP = {
    ("system", "length"): "length",
    ("system", "j_leg"): "j_leg",
    ("system", "j_rung"): "j_rung",
    ("system", "anisotropy"): "anisotropy",
    ("system", "seed"): "seed",
    ("system", "memory_budget"): "memory_budget",
    ("field", "strength"): "field_strength",
    ("field", "gamma0"): "gamma0",
    ("field", "rates"): "rates",
    ("filter", "sharpness"): "filter_sharpness",
    ("filter", "e_ini"): "e_ini",
    ("evolve", "dt"): "dt",
    ("spectral", "k_dos"): "k_dos",
    ("spectral", "k_ldos"): "k_ldos",
    ("spectral", "n_dos_states"): "n_dos_states",
    ("spectral", "gauss_factor"): "gauss_factor",
    ("analysis", "epsilons"): "epsilons",
    ("analysis", "beta_epsilon"): "beta_epsilon",
    ("analysis", "beta_override"): "beta_override",
    ("output", "out_dir"): "out_dir",
}
_FIELD_TO_INI = {v: k for k, v in _INI_MAP.items()}


@dataclass(frozen=True)
class ExperimentConfig:
    """All knobs of one experiment; only the ladder length is mandatory."""

    length: int
    j_leg: float = 1.0
    j_rung: float = 0.2
    anisotropy: float = 0.6
    seed: int = 1
    memory_budget: int | None = None
    field_strength: float = 0.5
    gamma0: float = 2.6e-4
    rates: tuple[float, ...] = DEFAULT_RATES
    filter_sharpness: float = 1000.0
    e_ini: float | None = None          # None -> -0.42 * (length - 1)
    dt: float = 0.02
    k_dos: int = 20480
    k_ldos: int = 20480
    n_dos_states: int = 1
    # Gaussian window width in units of the resolution pi/Theta; 0 keeps
    # the rectangular truncation.  Windowing suppresses the oscillatory
    # truncation tails that the exponential reweighting would amplify;
    # the broadening it adds cancels in the work-average ratio.  The
    # window value left at the truncation edge is exp(-(f pi)^2 / 2)
    # independent of the series length, so f = 1.5 (1.5e-5 leakage) is
    # the default; 0.75 leaves a 6% edge, too coarse for non-decaying
    # few-level series.
    gauss_factor: float = 1.5
    epsilons: tuple[float, ...] = DEFAULT_EPSILONS
    beta_epsilon: float = 0.5
    beta_override: float | None = None  # skip the DOS fit when set
    out_dir: str = "qwork_out"

    def __post_init__(self):
        if self.length < 1:
            raise ConfigError("system.length must be at least 1")
        if self.dt <= 0:
            raise ConfigError("evolve.dt must be positive")
        if self.gamma0 <= 0:
            raise ConfigError("field.gamma0 must be positive")
        if not self.rates:
            raise ConfigError("field.rates must not be empty")
        if self.gauss_factor < 0:
            raise ConfigError("spectral.gauss_factor must be >= 0")

    @property
    def ladder(self) -> LadderSpec:
        return LadderSpec(length=self.length, j_leg=self.j_leg,
                          j_rung=self.j_rung, anisotropy=self.anisotropy)

    @property
    def integrator(self) -> IntegratorConfig:
        return IntegratorConfig(dt=self.dt)

    @property
    def resolved_e_ini(self) -> float:
        if self.e_ini is not None:
            return self.e_ini
        return -0.42 * (self.length - 1)

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["rates"] = list(self.rates)
        out["epsilons"] = list(self.epsilons)
        return out


def from_dict(data: dict) -> ExperimentConfig:
    known = {f.name for f in dataclasses.fields(ExperimentConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config field(s): {sorted(unknown)}")
    if "length" not in data:
        raise ConfigError("missing required config field: system.length")
    data = dict(data)
    for key in ("rates", "epsilons"):
        if key in data:
            data[key] = tuple(float(x) for x in data[key])
    return ExperimentConfig(**data)


_INT_FIELDS = {"length", "seed", "k_dos", "k_ldos", "n_dos_states",
               "memory_budget"}
_OPTIONAL_FIELDS = {"e_ini", "beta_override", "memory_budget"}
_LIST_FIELDS = {"rates", "epsilons"}


def _parse_ini_value(field: str, raw: str):
    raw = raw.strip()
    if field in _OPTIONAL_FIELDS and raw.lower() in ("auto", "none", ""):
        return None
    try:
        if field in _LIST_FIELDS:
            return tuple(float(x) for x in raw.split(",") if x.strip())
        if field in _INT_FIELDS:
            return int(raw)
        if field == "out_dir":
            return raw
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"cannot parse {field} = {raw!r}: {exc}") from exc


def load_config(path) -> ExperimentConfig:
    """Read an INI (default) or JSON configuration file."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    text = path.read_text()
    if path.suffix == ".json" or text.lstrip().startswith("{"):
        try:
            return from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    parser = configparser.ConfigParser()
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    data = {}
    for section in parser.sections():
        for key, raw in parser.items(section):
            field = _INI_MAP.get((section, key))
            if field is None:
                raise ConfigError(
                    f"unknown config entry [{section}] {key}")
            data[field] = _parse_ini_value(field, raw)
    return from_dict(data)


def save_config(cfg: ExperimentConfig, path) -> None:
    """Write the canonical INI form (lossless float round-trip)."""
    path = Path(path)
    if path.suffix == ".json":
        path.write_text(json.dumps(cfg.to_dict(), indent=2, sort_keys=True)
                        + "\n")
        return
    parser = configparser.ConfigParser()
    for field in dataclasses.fields(ExperimentConfig):
        section, key = _FIELD_TO_INI[field.name]
        value = getattr(cfg, field.name)
        if value is None:
            text = "auto"
        elif field.name in _LIST_FIELDS:
            text = ", ".join(repr(float(x)) for x in value)
        elif isinstance(value, float):
            text = repr(value)
        else:
            text = str(value)
        if not parser.has_section(section):
            parser.add_section(section)
        parser.set(section, key, text)
    with open(path, "w") as fh:
        parser.write(fh)


def config_hash(cfg: ExperimentConfig) -> str:
    """Short stable hash of the canonical configuration."""
    canon = json.dumps(cfg.to_dict(), sort_keys=True)
    return hashlib.sha256(canon.encode()).hexdigest()[:12]
