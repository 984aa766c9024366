"""Gaussian control pulse trains and CPMG factories."""
import csv
from dataclasses import dataclass, field

import numpy as np

from .noisegen import rng_stream

AXES = ("x", "y", "z")


@dataclass(frozen=True)
class ControlPulseSpec:
    amplitudes: tuple
    centers: tuple
    width_param: float
    axis: str = "x"

    def __post_init__(self):
        object.__setattr__(self, "amplitudes", tuple(float(a) for a in self.amplitudes))
        object.__setattr__(self, "centers", tuple(float(c) for c in self.centers))
        if len(self.amplitudes) != len(self.centers):
            raise ValueError("amplitudes and centers differ in length")
        if not self.width_param > 0:
            raise ValueError("width_param must be positive")
        if self.axis not in AXES:
            raise ValueError(f"axis must be one of {AXES}")

    @property
    def n_max(self):
        return len(self.amplitudes)

    def sigma(self, grid):
        """Pulse standard deviation ``T / (lambda * M)``."""
        return grid.total_time / (self.width_param * grid.num_steps)


@dataclass
class ControlField:
    f_x: np.ndarray
    f_y: np.ndarray = field(default=None)
    f_z: np.ndarray = field(default=None)

    def __post_init__(self):
        self.f_x = np.asarray(self.f_x, dtype=np.float64)
        self.f_y = np.zeros_like(self.f_x) if self.f_y is None else np.asarray(self.f_y, dtype=np.float64)
        self.f_z = np.zeros_like(self.f_x) if self.f_z is None else np.asarray(self.f_z, dtype=np.float64)

    @classmethod
    def zeros(cls, grid):
        return cls(np.zeros(grid.num_steps))

    def as_array(self):
        """(M, 3) array of the x, y, z amplitudes."""
        return np.stack([self.f_x, self.f_y, self.f_z], axis=-1)

    def __len__(self):
        return self.f_x.shape[0]


def gaussian_train(spec, grid):
    """Sum of Gaussians ``A_n exp(-(t - tau_n)^2 / (2 sigma^2))`` on the grid."""
    t = grid.times
    sigma = spec.sigma(grid)
    amps = np.asarray(spec.amplitudes)
    cent = np.asarray(spec.centers)
    if amps.size:
        f = (amps[:, None] * np.exp(-((t[None, :] - cent[:, None]) ** 2) / (2 * sigma**2))).sum(0)
    else:
        f = np.zeros_like(t)
    axes = {a: np.zeros_like(t) for a in AXES}
    axes[spec.axis] = f
    return ControlField(axes["x"], axes["y"], axes["z"])


def cpmg_centers(grid, n_max=5):
    n = np.arange(1, n_max + 1)
    return (n - 0.5) / n_max * grid.total_time


def cpmg_ideal(grid):
    """Five jitter-free pi pulses with width parameter 1/96."""
    return ControlPulseSpec(
        amplitudes=(np.pi,) * 5, centers=tuple(cpmg_centers(grid)), width_param=1 / 96, axis="x"
    )


def cpmg_realistic(grid, seed, index=None):
    """Wider CPMG pulses with uniform timing and amplitude jitter.

    Timing jitter is drawn from ``U[-24T/M, 24T/M]`` and the amplitude error
    from ``U[-pi/5, pi/5]``; centers are clamped into ``[0, T]``.
    """
    rng = rng_stream(seed, index)
    n_max = 5
    jitter_max = 24 * grid.total_time / grid.num_steps
    delta = rng.uniform(-jitter_max, jitter_max, n_max)
    eps = rng.uniform(-np.pi / 5, np.pi / 5, n_max)
    centers = np.clip(cpmg_centers(grid, n_max) + delta, 0.0, grid.total_time)
    return ControlPulseSpec(
        amplitudes=tuple(np.pi + eps), centers=tuple(centers), width_param=1 / 24, axis="x"
    )


def write_csv(path, grid, fld):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "f_x", "f_y", "f_z"])
        for row in zip(grid.times, fld.f_x, fld.f_y, fld.f_z):
            w.writerow([repr(float(v)) for v in row])


def read_csv(path):
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0], ControlField(data[:, 1], data[:, 2], data[:, 3])
