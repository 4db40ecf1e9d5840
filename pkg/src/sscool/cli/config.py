"""Experiment configuration: flag and ``key = value`` file handling."""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import analytics
from ..model import DEFAULT_CUTOFF, Tier
from ..numkit import ContractError
from ..params import IonParams

SWEEP_AXES = ("omega", "eta", "gamma", "n0")
PARAM_KEYS = ("nu", "gamma", "omega", "delta", "eta", "n0", "emission")
RUN_KEYS = ("cutoff", "tier", "t_final", "samples", "rel_tol", "axis", "grid",
            "out", "workers", "seed")
ALL_KEYS = PARAM_KEYS + RUN_KEYS
DEFAULT_SWEEP_POINTS = 24


class ConfigError(ValueError):
    """Invalid or inconsistent experiment configuration."""


@dataclass(frozen=True)
class SweepAxis:
    name: str
    values: tuple

    def __post_init__(self):
        if self.name not in SWEEP_AXES:
            raise ConfigError(f"sweep axis must be one of {SWEEP_AXES}, got {self.name!r}")
        v = np.asarray(self.values, dtype=float)
        if v.size == 0 or not np.all(np.isfinite(v)):
            raise ConfigError("sweep grid must hold finite values")
        if v.size > 1 and not np.all(np.diff(v) > 0):
            raise ConfigError("sweep grid values must be strictly increasing")


@dataclass(frozen=True)
class ExperimentConfig:
    params: IonParams
    cutoff: int = DEFAULT_CUTOFF
    tier: Tier = Tier.EXACT
    t_final: float | None = None  # None selects the per-point default
    samples: int = 400
    rel_tol: float = 1e-8
    sweep: SweepAxis | None = None
    output_dir: Path = Path("out")
    workers: int = field(default_factory=lambda: os.cpu_count() or 1)
    seed: int = 0
    delta_given: bool = False

    def resolved_t_final(self, p: IonParams | None = None) -> float:
        return self.t_final if self.t_final is not None else analytics.default_t_final(
            p if p is not None else self.params)

    def provenance(self) -> dict:
        out = {k: getattr(self.params, k) for k in PARAM_KEYS}
        out.update(cutoff=self.cutoff, tier=self.tier.value,
                   t_final="auto" if self.t_final is None else self.t_final,
                   samples=self.samples, rel_tol=self.rel_tol, seed=self.seed)
        if self.sweep is not None:
            out.update(axis=self.sweep.name, grid=",".join(repr(float(v)) for v in self.sweep.values))
        return out


def parse_grid(text: str) -> tuple:
    """``start:stop:count`` (inclusive linspace) or a comma list."""
    text = str(text).strip()
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) != 3:
                raise ConfigError(f"grid range needs start:stop:count, got {text!r}")
            start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
            if count < 1:
                raise ConfigError("grid count must be positive")
            return tuple(float(x) for x in np.linspace(start, stop, count))
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise ConfigError(f"cannot parse grid {text!r}: {exc}") from None


def read_config_file(path) -> dict:
    """Plain ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    for num, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{num}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in ALL_KEYS:
            raise ConfigError(f"{path}:{num}: unknown key {key!r}")
        out[key] = value
    return out


def _num(settings, key, kind, default=None):
    if key not in settings or settings[key] is None:
        return default
    try:
        return kind(settings[key])
    except (TypeError, ValueError):
        raise ConfigError(f"{key} must be {kind.__name__}, got {settings[key]!r}") from None


def build_config(settings: dict, *, need_resonance: bool = True) -> ExperimentConfig:
    """Validate merged settings (file values overridden by flags)."""
    base = IonParams()
    kw = {k: _num(settings, k, float, getattr(base, k))
          for k in ("nu", "gamma", "omega", "delta", "eta", "n0")}
    kw["emission"] = settings.get("emission") or base.emission
    delta_given = settings.get("delta") is not None
    try:
        p = IonParams(**kw)
        if not delta_given and need_resonance:
            if p.omega >= p.nu:
                raise ConfigError("no resonant detuning for omega >= nu; pass --delta")
            p = p.with_ssc_detuning()
    except ContractError as exc:
        raise ConfigError(str(exc)) from None

    cutoff = _num(settings, "cutoff", int, DEFAULT_CUTOFF)
    samples = _num(settings, "samples", int, 400)
    rel_tol = _num(settings, "rel_tol", float, 1e-8)
    t_final = _num(settings, "t_final", float, None)
    workers = _num(settings, "workers", int, os.cpu_count() or 1)
    seed = _num(settings, "seed", int, 0)
    if cutoff < 2:
        raise ConfigError("cutoff must be at least 2")
    if samples < 10:
        raise ConfigError("samples must be at least 10")
    if not 0 < rel_tol < 1:
        raise ConfigError("rel_tol must lie in (0, 1)")
    if t_final is not None and not (np.isfinite(t_final) and t_final > 0):
        raise ConfigError(f"t_final must be positive, got {t_final}")
    if workers < 1:
        raise ConfigError("workers must be at least 1")
    try:
        tier = Tier(str(settings.get("tier") or "EXACT").upper())
    except ValueError:
        raise ConfigError(f"unknown tier {settings.get('tier')!r}") from None

    sweep = None
    if settings.get("axis"):
        axis = str(settings["axis"])
        grid = settings.get("grid")
        values = parse_grid(grid) if grid else _default_grid(axis)
        sweep = SweepAxis(axis, values)

    out = Path(settings.get("out") or "out")
    return ExperimentConfig(p, cutoff, tier, t_final, samples, rel_tol, sweep, out,
                            workers, seed, delta_given)


def _default_grid(axis: str) -> tuple:
    ranges = {"omega": (0.05, 0.6, DEFAULT_SWEEP_POINTS), "eta": (0.02, 0.3, 15),
              "gamma": (0.02, 0.3, 15), "n0": (1.0, 10.0, 10)}
    if axis not in ranges:
        raise ConfigError(f"sweep axis must be one of {SWEEP_AXES}, got {axis!r}")
    start, stop, count = ranges[axis]
    return tuple(float(x) for x in np.linspace(start, stop, count))


def ensure_output_dir(path: Path) -> Path:
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {path}: {exc}") from None
    if not os.access(path, os.W_OK):
        raise ConfigError(f"output directory {path} is not writable")
    return path
