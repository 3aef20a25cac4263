"""Sampled solution trajectories shared by the schemes and the harness."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class Trajectory:
    """States sampled on a uniform output grid.

    bulk holds one row per sample of the bulk nodal values, surf the
    surface variable (p for kinetic, delta for acoustic), energy the
    discrete energy functional at each sample.
    """

    times: np.ndarray
    bulk: np.ndarray
    surf: np.ndarray
    energy: np.ndarray

    def __post_init__(self) -> None:
        ns = self.times.shape[0]
        if not (self.bulk.shape[0] == self.surf.shape[0] == self.energy.shape[0] == ns):
            raise ValueError("inconsistent sample counts")


def output_times(T: float, dt_out: float) -> np.ndarray:
    """Uniform sample grid 0, dt_out, ..., T."""
    n_out = round(T / dt_out)
    if abs(n_out * dt_out - T) > 1e-9 * max(1.0, T):
        raise ValueError(f"dt_out={dt_out} does not divide T={T}")
    return np.arange(n_out + 1) * dt_out


def steps_per_sample(tau: float, dt_out: float) -> int:
    """Number of steps of size tau between consecutive samples."""
    k = round(dt_out / tau)
    if k < 1 or abs(k * tau - dt_out) > 1e-9 * dt_out:
        raise ValueError(f"tau={tau} does not divide the output spacing {dt_out}")
    return k
