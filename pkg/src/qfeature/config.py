"""Versioned YAML run configuration, validated with pydantic.

Unknown keys are rejected everywhere so that typos fail loudly.
"""
import hashlib
import json
from typing import List, Literal, Optional, Tuple

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from . import noisegen as ng
from . import pulsegen as pg
from . import qsim
from .classify.dataset import DatasetRanges

SCHEMA_VERSION = 1


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class GridCfg(_Strict):
    total_time: float = Field(1.0, gt=0)
    num_steps: int = Field(1024, ge=2)

    def build(self):
        return ng.TimeGrid(self.total_time, self.num_steps)


class NoiseCfg(_Strict):
    family: Literal["1/f", "1/f+bump", "coloured"]
    label: Optional[str] = None
    exponent: float = 1.0
    peak_bin: float = 200.0
    bump_width_bins: float = Field(10.0, gt=0)
    bump_height: Optional[float] = None
    division_factor: float = Field(4.0, gt=0)
    stationary: bool = True
    envelope_peak_fraction: float = Field(0.5, gt=0, lt=1)
    scale_factor: float = Field(1.0, ge=0)

    def build(self):
        if self.family == "1/f":
            fam = ng.OneOverF(self.exponent)
        elif self.family == "1/f+bump":
            fam = ng.OneOverFBump(self.exponent, self.peak_bin, self.bump_width_bins, self.bump_height)
        else:
            fam = ng.ColoredGaussian(self.division_factor)
        return ng.NoiseModel(fam, self.stationary, self.envelope_peak_fraction, self.scale_factor)

    @property
    def name(self):
        return self.label or self.build().label


class PulseCfg(_Strict):
    factory: Literal["ideal", "realistic", "custom", "none"] = "ideal"
    count: int = Field(1, ge=1)
    width_param: Optional[float] = Field(None, gt=0)
    amplitudes: Optional[List[float]] = None
    centers: Optional[List[float]] = None
    axis: Literal["x", "y", "z"] = "x"

    def build(self, grid, seed):
        """Pulse specs, one per sequence, in canonical order."""
        if self.factory == "none":
            return [pg.ControlPulseSpec((), (), 1.0, self.axis)] * self.count
        if self.factory == "custom":
            if self.amplitudes is None or self.centers is None or self.width_param is None:
                raise ValueError("custom pulses need amplitudes, centers and width_param")
            return [pg.ControlPulseSpec(self.amplitudes, self.centers, self.width_param, self.axis)] * self.count
        if self.factory == "ideal":
            spec = pg.cpmg_ideal(grid)
            if self.width_param is not None:
                spec = pg.ControlPulseSpec(spec.amplitudes, spec.centers, self.width_param, spec.axis)
            return [spec] * self.count
        return [pg.cpmg_realistic(grid, ng.derive_seed(seed, 1, i)) for i in range(self.count)]


class DatasetCfg(_Strict):
    count: int = Field(600, ge=6)
    exponent: Tuple[float, float] = (0.7, 1.3)
    peak_bin: Tuple[float, float] = (0.0, 256.0)
    division_factor: Tuple[float, float] = (2.0, 16.0)
    envelope_peak: Tuple[float, float] = (0.1, 0.9)
    bump_width_bins: float = 10.0
    bump_height: Optional[float] = None

    @field_validator("count")
    @classmethod
    def _balanced(cls, v):
        if v % 6:
            raise ValueError("count must be a multiple of 6")
        return v

    def ranges(self):
        return DatasetRanges(
            self.exponent, self.peak_bin, self.division_factor, self.envelope_peak,
            self.bump_width_bins, self.bump_height,
        )


class TrainCfg(_Strict):
    folds: int = Field(10, ge=2)
    k: int = Field(5, ge=1)
    n_estimators: int = Field(1, ge=1)
    l2: float = Field(1e-3, ge=0)
    targets: List[Literal["stationarity", "noise_type"]] = ["stationarity", "noise_type"]


class SweepCfg(_Strict):
    study: Literal["pulse-width", "interpolation", "energy"] = "energy"
    values: Optional[List[float]] = None
    # interpolation endpoints; defaults to the first two noise models
    mix_from: Optional[int] = None
    mix_to: Optional[int] = None


class RefineCfg(_Strict):
    grid: List[float] = [15, 30, 60, 120, 240, 480]
    budget: int = Field(2, ge=1)
    cells: int = Field(6, ge=1)
    template: Optional[NoiseCfg] = None


class RunConfig(_Strict):
    version: Literal[1] = 1
    grid: GridCfg = GridCfg()
    omega: float = 12.0
    realisations: int = Field(2000, ge=1)
    seed: int = 0
    precision: Literal["double", "single"] = "double"
    pulse: PulseCfg = PulseCfg()
    noise: List[NoiseCfg] = Field(default_factory=list)
    references: List[NoiseCfg] = Field(default_factory=list)
    dataset: DatasetCfg = DatasetCfg()
    train: TrainCfg = TrainCfg()
    sweep: SweepCfg = SweepCfg()
    refine: RefineCfg = RefineCfg()
    output: str = "out"

    def sim_config(self, nthreads=0):
        return qsim.SimConfig(self.grid.build(), self.omega, self.realisations, nthreads, self.precision)

    def canonical(self):
        return self.model_dump(mode="json")

    def hash(self):
        text = json.dumps(self.canonical(), sort_keys=True)
        return hashlib.sha256(text.encode()).hexdigest()[:16]


class ConfigError(ValueError):
    pass


def load_config(path=None, overrides=None):
    data = {}
    if path is not None:
        with open(path) as fh:
            data = yaml.safe_load(fh) or {}
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be a mapping")
    data.update({k: v for k, v in (overrides or {}).items() if v is not None})
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from None


def dump_config(cfg):
    return yaml.safe_dump(cfg.canonical(), sort_keys=True)
