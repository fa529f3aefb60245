"""Run configuration: flat key=value or JSON files, with flag overrides."""
from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional

from .dynamics import DEFAULT_AMPLITUDE, IntegratorConfig
from .equilibrium import ModelParams

OUT_DIR_ENV = "RACETRACK_OUT_DIR"
FORMATS = ("csv", "json")
DEFAULT_SEED_COUNT = 10


class ConfigError(ValueError):
    """Invalid configuration; the message starts with the offending key."""


def _parse_seeds(text: str) -> list:
    seeds = []
    for part in text.replace(" ", "").split(","):
        if not part:
            continue
        if "-" in part:
            lo, hi = (int(s) for s in part.split("-", 1))
            if hi < lo:
                raise ValueError(f"empty seed range {part!r}")
            seeds.extend(range(lo, hi + 1))
        else:
            seeds.append(int(part))
    return seeds


def _as_int(v):
    if isinstance(v, bool):
        raise ValueError("expected an integer")
    if isinstance(v, float):
        if not v.is_integer():
            raise ValueError(f"expected an integer, got {v!r}")
        return int(v)
    return int(v)


def _as_float(v):
    if isinstance(v, bool):
        raise ValueError("expected a number")
    x = float(v)
    if not math.isfinite(x):
        raise ValueError(f"expected a finite number, got {v!r}")
    return x


def _as_seeds(v):
    if isinstance(v, str):
        seeds = _parse_seeds(v)
    elif isinstance(v, (list, tuple)):
        seeds = [_as_int(s) for s in v]
    else:
        raise ValueError("expected a list of integers or a string like '0-9'")
    if not seeds:
        raise ValueError("at least one seed is required")
    if any(s < 0 for s in seeds):
        raise ValueError("seeds must be nonnegative")
    if len(set(seeds)) != len(seeds):
        raise ValueError("duplicate seeds")
    return seeds


def _as_formats(v):
    items = v.split(",") if isinstance(v, str) else list(v)
    out = []
    for it in items:
        it = str(it).strip().lower()
        if it not in FORMATS:
            raise ValueError(f"unknown format {it!r}, choose from {FORMATS}")
        if it not in out:
            out.append(it)
    if not out:
        raise ValueError("at least one format is required")
    return out


_CONVERTERS = {
    "mu": _as_float, "sigma": _as_float, "tau": _as_float, "F": _as_float, "Phi": _as_float,
    "I": _as_int, "dt": _as_float, "epsilon": _as_float, "max_steps": _as_int,
    "snapshot_stride": _as_int, "seed": _as_int, "seeds": _as_seeds,
    "amplitude": _as_float, "kappa": _as_float, "n_max": _as_int,
    "out_dir": str, "format": _as_formats,
}


@dataclass(frozen=True)
class RunConfig:
    mu: float = 0.1
    sigma: float = 5.0
    tau: float = 0.5
    F: float = 1.0
    Phi: float = 1.3
    I: int = 256
    dt: float = 0.01
    epsilon: float = 1e-10
    max_steps: int = 5_000_000
    snapshot_stride: int = 0
    seed: int = 0
    seeds: Optional[list] = None
    amplitude: float = DEFAULT_AMPLITUDE
    kappa: float = 2.0
    n_max: int = 64
    out_dir: str = "results"
    format: list = field(default_factory=lambda: list(FORMATS))

    def __post_init__(self):
        # run every component validator so bad values surface at load time
        for name, check in (("params", self.params), ("integrator", self.integrator)):
            try:
                check()
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
        if self.I < 4 or self.I % 2:
            raise ConfigError(f"I: must be an even integer >= 4, got {self.I}")
        if self.seed < 0:
            raise ConfigError(f"seed: must be >= 0, got {self.seed}")
        if not 0 <= self.amplitude < 1:
            raise ConfigError(f"amplitude: must satisfy 0 <= amplitude < 1, got {self.amplitude}")
        if not self.kappa > 1:
            raise ConfigError(f"kappa: must be > 1, got {self.kappa}")
        if self.n_max < 1:
            raise ConfigError(f"n_max: must be >= 1, got {self.n_max}")
        if not self.out_dir:
            raise ConfigError("out_dir: must not be empty")

    def params(self) -> ModelParams:
        return ModelParams(mu=self.mu, sigma=self.sigma, tau=self.tau, F=self.F, Phi=self.Phi)

    def integrator(self) -> IntegratorConfig:
        return IntegratorConfig(dt=self.dt, epsilon=self.epsilon, max_steps=self.max_steps,
                                snapshot_stride=self.snapshot_stride)

    def seed_list(self) -> list:
        if self.seeds is not None:
            return list(self.seeds)
        return list(range(self.seed, self.seed + DEFAULT_SEED_COUNT))

    def replace(self, **changes) -> "RunConfig":
        return build_config({**self.as_dict(), **changes})

    def as_dict(self) -> dict:
        d = asdict(self)
        if d["seeds"] is None:
            del d["seeds"]
        return d

    def to_text(self) -> str:
        """key=value rendering that load_config reads back unchanged."""
        lines = []
        for k, v in self.as_dict().items():
            if isinstance(v, float):
                v = repr(v)
            elif isinstance(v, list):
                v = ",".join(str(x) for x in v)
            lines.append(f"{k} = {v}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True) + "\n"


def build_config(values: dict, source: str = "config") -> RunConfig:
    """Convert raw values (strings or JSON scalars), reject unknown keys."""
    known = {f.name for f in fields(RunConfig)}
    kwargs = {}
    for key, raw in values.items():
        if key not in known:
            raise ConfigError(f"{key}: unknown key in {source} (known: {', '.join(sorted(known))})")
        try:
            kwargs[key] = _CONVERTERS[key](raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{key}: {exc}") from None
    return RunConfig(**kwargs)


def parse_text(text: str, source: str = "config") -> dict:
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key = value, got {line!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if key in values:
            raise ConfigError(f"{key}: given twice in {source} (line {lineno})")
        values[key] = val
    return values


def read_config_file(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc.strerror}") from None
    if path.suffix.lower() == ".json" or text.lstrip().startswith("{"):
        try:
            values = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config: {path} is not valid JSON: {exc}") from None
        if not isinstance(values, dict):
            raise ConfigError(f"config: {path} must hold a JSON object")
        return values
    return parse_text(text, str(path))


def load_config(path=None, overrides: Optional[dict] = None, env=None) -> RunConfig:
    """File values, then the output-directory variable, then explicit overrides."""
    env = os.environ if env is None else env
    values = read_config_file(path) if path is not None else {}
    source = str(path) if path is not None else "config"
    if env.get(OUT_DIR_ENV):
        values["out_dir"] = env[OUT_DIR_ENV]
    for k, v in (overrides or {}).items():
        if v is not None:
            values[k] = v
    return build_config(values, source)
