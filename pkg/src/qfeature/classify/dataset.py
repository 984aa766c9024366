"""Balanced dataset of simulated QFS points over randomised noise profiles."""
import csv
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from .. import noisegen as ng
from .. import pulsegen as pg
from .. import qfs, qsim
from .._parallel import parallel_map

NOISE_TYPES = ("1/f", "1/f+bump", "coloured")


@dataclass(frozen=True)
class DatasetRanges:
    exponent: tuple = (0.7, 1.3)
    peak_bin: tuple = (0.0, 256.0)
    division_factor: tuple = (2.0, 16.0)
    envelope_peak: tuple = (0.1, 0.9)
    bump_width_bins: float = 10.0
    bump_height: float = None

    def validate(self, grid):
        for name in ("exponent", "peak_bin", "division_factor", "envelope_peak"):
            lo, hi = getattr(self, name)
            if not lo <= hi:
                raise ValueError(f"{name}: empty range {lo}..{hi}")
        if self.division_factor[0] <= 0:
            raise ValueError("division_factor must be positive")
        if not (0 < self.envelope_peak[0] and self.envelope_peak[1] < 1):
            raise ValueError("envelope_peak must lie inside (0, 1)")
        if self.peak_bin[0] < 0 or self.peak_bin[1] > grid.num_steps // 2:
            raise ValueError("peak_bin range exceeds the spectrum")


@dataclass
class DatasetRecord:
    features: object  # QfsPoint
    noise_type: str
    stationary: bool
    params: dict = field(default_factory=dict)


def sample_model(noise_type, stationary, rng, ranges):
    """Draw one noise model uniformly inside the ranges."""
    params = {}
    if noise_type in ("1/f", "1/f+bump"):
        params["exponent"] = rng.uniform(*ranges.exponent)
        if noise_type == "1/f":
            fam = ng.OneOverF(params["exponent"])
        else:
            params["peak_bin"] = rng.uniform(*ranges.peak_bin)
            fam = ng.OneOverFBump(
                params["exponent"], params["peak_bin"], ranges.bump_width_bins, ranges.bump_height
            )
    elif noise_type == "coloured":
        params["division_factor"] = rng.uniform(*ranges.division_factor)
        fam = ng.ColoredGaussian(params["division_factor"])
    else:
        raise ValueError(f"unknown noise type {noise_type!r}")
    peak = 0.5
    if not stationary:
        peak = params["envelope_peak"] = rng.uniform(*ranges.envelope_peak)
    return ng.NoiseModel(fam, stationary, peak, 1.0), params


def record_plan(count, master_seed, ranges):
    """Labels, models and noise seeds for every record, in canonical order.

    Realisation ``k`` of every record draws from the stream
    ``(master_seed, k)``, so records differ only through their noise model.
    Model parameters come from a separate family of streams.
    """
    if count % 6:
        raise ValueError("count must be a multiple of 6 for a balanced split")
    per = count // 6
    param_root = ng.derive_seed(master_seed, 3)
    plan = []
    for noise_type in NOISE_TYPES:
        for stationary in (True, False):
            for _ in range(per):
                i = len(plan)
                rng = ng.rng_stream(param_root, i)
                model, params = sample_model(noise_type, stationary, rng, ranges)
                plan.append((i, noise_type, stationary, model, params, int(master_seed)))
    return plan


def _simulate_record(item, cfg):
    i, noise_type, stationary, model, params, seed = item
    fld = pg.gaussian_train(pg.cpmg_ideal(cfg.grid), cfg.grid)
    point = qfs.simulate_point(cfg, fld, model, seed, {"id": i})
    return DatasetRecord(point, noise_type, stationary, dict(params, seed=seed))


def generate_dataset(ranges=None, count=600, master_seed=0, cfg=None, workers=1):
    """Simulate ``count`` balanced records under the ideal CPMG sequence."""
    ranges = ranges or DatasetRanges()
    cfg = cfg or qsim.SimConfig(realisations=500)
    ranges.validate(cfg.grid)
    plan = record_plan(count, master_seed, ranges)
    return parallel_map(partial(_simulate_record, cfg=cfg), plan, workers)


def to_arrays(records, target):
    x = np.array([r.features.features for r in records])
    if target == "noise_type":
        y = np.array([NOISE_TYPES.index(r.noise_type) for r in records])
    elif target == "stationarity":
        y = np.array([int(r.stationary) for r in records])
    else:
        raise ValueError(f"unknown target {target!r}")
    return x, y


PARAM_FIELDS = ("exponent", "peak_bin", "division_factor", "envelope_peak", "seed")


def write_csv(path, records):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "noise_type", "stationary", *PARAM_FIELDS, *qfs.FEATURE_NAMES])
        for i, r in enumerate(records):
            params = [r.params.get(k, "") for k in PARAM_FIELDS]
            params = [repr(float(v)) if isinstance(v, float) else v for v in params]
            feats = [repr(float(v)) for v in r.features.features]
            w.writerow([i, r.noise_type, int(r.stationary), *params, *feats])


def read_csv(path):
    records = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for rowno, row in enumerate(reader, start=2):
            try:
                feats = np.array([float(row[n]) for n in qfs.FEATURE_NAMES])
                params = {}
                for k in PARAM_FIELDS:
                    if row.get(k):
                        params[k] = int(row[k]) if k == "seed" else float(row[k])
                stationary = bool(int(row["stationary"]))
            except (KeyError, ValueError, TypeError) as exc:
                raise ValueError(f"{path}: row {rowno}: {exc}") from None
            if row["noise_type"] not in NOISE_TYPES:
                raise ValueError(f"{path}: row {rowno}: unknown noise_type {row['noise_type']!r}")
            records.append(
                DatasetRecord(qfs.QfsPoint(feats, {"id": row["id"]}), row["noise_type"], stationary, params)
            )
    return records
