"""Classical noise trajectories for the x and z coupling channels.

Realisations are drawn by spectral synthesis. For a one-sided PSD ``S_k`` on
bins ``k = 0..M/2`` the series is

    x_j = sum_k sqrt(2 S_k) cos(2 pi k j / M + phi_k),   phi_k ~ U[0, 2 pi)

whose expected per-sample variance is ``sum_k S_k``. Profiles are normalised
so that this variance is one before the envelope and scale factor apply.
"""
import csv
from dataclasses import dataclass, field
from typing import Union

import numpy as np


@dataclass(frozen=True)
class TimeGrid:
    total_time: float = 1.0
    num_steps: int = 1024

    def __post_init__(self):
        if self.num_steps < 2:
            raise ValueError("num_steps must be at least 2")
        if not self.total_time > 0:
            raise ValueError("total_time must be positive")

    @property
    def dt(self):
        return self.total_time / self.num_steps

    @property
    def times(self):
        """Midpoints ``(j + 0.5) * dt``."""
        return (np.arange(self.num_steps) + 0.5) * self.dt

    @property
    def num_bins(self):
        return self.num_steps // 2 + 1


@dataclass(frozen=True)
class OneOverF:
    exponent: float = 1.0
    name = "1/f"


@dataclass(frozen=True)
class OneOverFBump:
    exponent: float = 1.0
    peak_bin: float = 200.0
    bump_width_bins: float = 10.0
    # None means half the strongest 1/f bin, S(1) / 2
    bump_height: Union[float, None] = None
    name = "1/f+bump"


@dataclass(frozen=True)
class ColoredGaussian:
    division_factor: float = 4.0
    name = "coloured"


Family = Union[OneOverF, OneOverFBump, ColoredGaussian]


@dataclass(frozen=True)
class NoiseModel:
    family: Family = field(default_factory=OneOverF)
    stationary: bool = True
    envelope_peak_fraction: float = 0.5
    scale_factor: float = 1.0

    def __post_init__(self):
        if self.scale_factor < 0:
            raise ValueError("scale_factor must be nonnegative")

    @property
    def label(self):
        return self.family.name + ("" if self.stationary else " NS")


@dataclass
class NoiseRealization:
    beta_x: np.ndarray
    beta_z: np.ndarray

    def __post_init__(self):
        self.beta_x = np.asarray(self.beta_x, dtype=np.float64)
        self.beta_z = np.asarray(self.beta_z, dtype=np.float64)
        if self.beta_x.shape != self.beta_z.shape:
            raise ValueError("beta_x and beta_z differ in shape")

    @classmethod
    def from_x(cls, beta_x):
        beta_x = np.asarray(beta_x, dtype=np.float64)
        return cls(beta_x, np.abs(beta_x))

    def __len__(self):
        return self.beta_x.shape[-1]


def rng_stream(master_seed, index=None):
    """Independent generator keyed by ``(master_seed, index)``."""
    key = [int(master_seed)] if index is None else [int(master_seed), int(index)]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(key)))


def psd_profile(model, grid):
    """Unnormalised one-sided PSD on bins ``0..M/2``."""
    fam = model.family if isinstance(model, NoiseModel) else model
    k = np.arange(grid.num_bins, dtype=np.float64)
    s = np.zeros_like(k)
    if isinstance(fam, (OneOverF, OneOverFBump)):
        s[1:] = k[1:] ** -fam.exponent
        if isinstance(fam, OneOverFBump):
            if not 0 <= fam.peak_bin <= grid.num_steps // 2:
                raise ValueError(f"peak_bin {fam.peak_bin} outside 0..{grid.num_steps // 2}")
            height = 0.5 * s[1] if fam.bump_height is None else fam.bump_height
            s += height * np.exp(-((k - fam.peak_bin) ** 2) / (2.0 * fam.bump_width_bins**2))
        s[0] = 0.0
    elif isinstance(fam, ColoredGaussian):
        if fam.division_factor <= 0:
            raise ValueError("division_factor must be positive")
        cutoff = (grid.num_steps / 2) / fam.division_factor
        s[k <= cutoff] = 1.0
    else:
        raise TypeError(f"unknown noise family {fam!r}")
    return s


def triangular_envelope(grid, peak_fraction):
    """Zero at ``t = 0`` and ``t = T``, one at ``peak_fraction * T``."""
    if not 0.0 < peak_fraction < 1.0:
        raise ValueError("peak_fraction must lie in (0, 1)")
    u = grid.times / grid.total_time
    return np.where(u <= peak_fraction, u / peak_fraction, (1.0 - u) / (1.0 - peak_fraction))


def _unit_psd(model, grid):
    s = psd_profile(model, grid)
    total = s.sum()
    return s / total if total > 0 else s


def _series_from_phases(amp, phases, m):
    """Evaluate the cosine sum for phase rows ``(K, M/2+1)`` via an inverse real FFT."""
    spec = (0.5 * m) * amp * np.exp(1j * phases)
    spec[..., 0] = m * amp[0] * np.cos(phases[..., 0])
    if m % 2 == 0:
        spec[..., -1] = m * amp[-1] * np.cos(phases[..., -1])
    return np.fft.irfft(spec, n=m, axis=-1)


def synthesize_x(model, grid, master_seed, indices):
    """Rows of ``beta_x`` for realisation indices under ``master_seed``."""
    indices = np.atleast_1d(indices)
    m = grid.num_steps
    if model.scale_factor == 0:
        return np.zeros((len(indices), m))
    amp = np.sqrt(2.0 * _unit_psd(model, grid))
    phases = np.empty((len(indices), grid.num_bins))
    for row, idx in enumerate(indices):
        phases[row] = rng_stream(master_seed, idx).uniform(0.0, 2.0 * np.pi, grid.num_bins)
    x = _series_from_phases(amp, phases, m)
    if not model.stationary:
        x *= triangular_envelope(grid, model.envelope_peak_fraction)
    return x * model.scale_factor


def synthesize(model, grid, seed, index=0):
    """One realisation, deterministic in ``(model, grid, seed, index)``."""
    x = synthesize_x(model, grid, seed, [index])[0]
    return NoiseRealization.from_x(x)


def synthesize_ensemble(model, grid, master_seed, count):
    """``count`` realisations stacked as ``(K, M)`` arrays."""
    x = synthesize_x(model, grid, master_seed, np.arange(count))
    return NoiseRealization.from_x(x)


def signal_energy(series):
    s = np.asarray(series, dtype=np.float64)
    if s.size == 0:
        raise ValueError("empty series")
    return float(np.sum(s * s))


def scale(r, c):
    return NoiseRealization.from_x(c * r.beta_x)


def mix(a, b, ratio):
    """Linear interpolation of the x channel; z is rebuilt as ``|x|``."""
    if a.beta_x.shape != b.beta_x.shape:
        raise ValueError("realisations differ in length")
    if not 0.0 <= ratio <= 1.0:
        raise ValueError("ratio must lie in [0, 1]")
    return NoiseRealization.from_x((1.0 - ratio) * a.beta_x + ratio * b.beta_x)


def write_csv(path, grid, r):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "beta_x", "beta_z"])
        for t, x, z in zip(grid.times, r.beta_x, r.beta_z):
            w.writerow([repr(float(t)), repr(float(x)), repr(float(z))])


def read_csv(path):
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0], NoiseRealization(data[:, 1], data[:, 2])


def derive_seed(*keys):
    """Integer seed derived from a tuple of integer keys."""
    return int(np.random.SeedSequence([int(k) for k in keys]).generate_state(1, np.uint64)[0] >> 2)


@dataclass(frozen=True)
class MixedModel:
    """Pointwise blend ``(1 - ratio) a + ratio b`` of two independent processes.

    Process ``a`` uses the master seed itself, so ``ratio = 0`` reproduces
    ``a`` exactly; ``b`` uses a seed derived from it.
    """

    a: NoiseModel
    b: NoiseModel
    ratio: float

    def __post_init__(self):
        if not 0.0 <= self.ratio <= 1.0:
            raise ValueError("ratio must lie in [0, 1]")

    @property
    def label(self):
        return f"mix({self.a.label},{self.b.label},{self.ratio:g})"

    def draw(self, grid, master_seed, indices):
        xa = synthesize_x(self.a, grid, master_seed, indices)
        xb = synthesize_x(self.b, grid, derive_seed(master_seed, 1), indices)
        return (1.0 - self.ratio) * xa + self.ratio * xb


def draw_x(model, grid, master_seed, indices):
    """``beta_x`` rows for any model exposing ``draw`` or a plain :class:`NoiseModel`."""
    if hasattr(model, "draw"):
        return model.draw(grid, master_seed, indices)
    return synthesize_x(model, grid, master_seed, indices)
