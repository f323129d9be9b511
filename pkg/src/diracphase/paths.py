"""
Time grids, noise processes and drift loops.

Noise paths are sampled one trajectory per random stream.  A stream is a
pure function of ``(master_seed, stream_index)``:

    SeedSequence(entropy=master_seed, spawn_key=(stream_index,)) -> PCG64

so trajectory ``i`` is the same no matter which batch, process or order
it is generated in.  All arrays of positions have shape ``(..., n + 1, 3)``
with time on the second-to-last axis.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from scipy.signal import lfilter


class InvalidArgumentError(ValueError):
    """Raised when an operation is called outside its preconditions."""


# -----------------------------------------------------------------------------
# Grids and parameters
# -----------------------------------------------------------------------------

@dataclass(frozen=True)
class TimeGrid:
    total_time: float
    steps: int

    @property
    def dt(self) -> float:
        return self.total_time / self.steps

    @property
    def times(self) -> np.ndarray:
        t = np.arange(self.steps + 1) * self.total_time / self.steps
        t[-1] = self.total_time  # j T / steps can round past T
        return t

    @property
    def n_nodes(self) -> int:
        return self.steps + 1


def make_time_grid(T: float, steps: int) -> TimeGrid:
    if not np.isfinite(T) or T <= 0:
        raise InvalidArgumentError(f"total time must be positive, got {T}")
    if int(steps) != steps or steps < 1:
        raise InvalidArgumentError(f"steps must be a positive integer, got {steps}")
    return TimeGrid(float(T), int(steps))


@dataclass(frozen=True)
class WienerParams:
    """Per-axis diffusion constants; increments have variance B * dt."""
    Bx: float
    By: float
    Bz: float = 0.0

    def __post_init__(self):
        for name in ("Bx", "By", "Bz"):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0:
                raise InvalidArgumentError(f"{name} must be >= 0, got {v}")

    @property
    def diffusion(self) -> np.ndarray:
        return np.array([self.Bx, self.By, self.Bz], dtype=float)


@dataclass(frozen=True)
class OUParams:
    """Isotropic Ornstein-Uhlenbeck noise: dx = -gamma x dt + sqrt(D) dW."""
    gamma: float
    D: float

    def __post_init__(self):
        if not np.isfinite(self.gamma) or self.gamma <= 0:
            raise InvalidArgumentError(f"gamma must be > 0, got {self.gamma}")
        if not np.isfinite(self.D) or self.D < 0:
            raise InvalidArgumentError(f"D must be >= 0, got {self.D}")

    @classmethod
    def from_epsilon(cls, gamma: float, epsilon: float) -> "OUParams":
        if epsilon < 0:
            raise InvalidArgumentError(f"epsilon must be >= 0, got {epsilon}")
        return cls(gamma, 2.0 * gamma * epsilon ** 2)

    @property
    def epsilon2(self) -> float:
        """Stationary variance per axis."""
        return self.D / (2.0 * self.gamma)

    @property
    def epsilon(self) -> float:
        return float(np.sqrt(self.epsilon2))


@dataclass(frozen=True)
class TrivialDrift:
    point: tuple

    @classmethod
    def on_sphere(cls, theta0: float, phi0: float = 0.0) -> "TrivialDrift":
        return cls(tuple(_sphere_point(theta0, phi0)))


@dataclass(frozen=True)
class PrecessionDrift:
    """Uniform precession about z at fixed colatitude, closed after ``turns`` turns."""
    theta0: float
    phi0: float = 0.0
    turns: int = 1

    def __post_init__(self):
        if int(self.turns) != self.turns or self.turns < 1:
            raise InvalidArgumentError(f"turns must be an integer >= 1, got {self.turns}")


DriftLoop = Union[TrivialDrift, PrecessionDrift]


def _sphere_point(theta, phi):
    return np.array([np.sin(theta) * np.cos(phi),
                     np.sin(theta) * np.sin(phi),
                     np.cos(theta) * np.ones_like(phi)])


@dataclass(frozen=True)
class RngStream:
    master_seed: int
    stream_index: int

    def generator(self) -> np.random.Generator:
        return stream_generator(self.master_seed, self.stream_index)


def stream_generator(master_seed: int, stream_index: int) -> np.random.Generator:
    seq = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(stream_index),))
    return np.random.Generator(np.random.PCG64(seq))


@dataclass(frozen=True)
class Trajectory:
    grid: TimeGrid
    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.shape != (self.grid.n_nodes, 3):
            raise InvalidArgumentError(
                f"expected {self.grid.n_nodes} points of dimension 3, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise InvalidArgumentError("trajectory coordinates must be finite")
        object.__setattr__(self, "points", pts)

    def reversed(self) -> "Trajectory":
        return Trajectory(self.grid, self.points[::-1].copy())


# Noise and trajectories share one representation.
NoisePath = Trajectory


# -----------------------------------------------------------------------------
# Noise sampling
# -----------------------------------------------------------------------------

def _indices(stream_indices) -> np.ndarray:
    return np.atleast_1d(np.asarray(stream_indices, dtype=np.int64))


def sample_wiener_paths(grid: TimeGrid, params: WienerParams, master_seed: int,
                        stream_indices: Sequence[int]) -> np.ndarray:
    """Brownian paths started at the origin, one row per stream index.

    Returns an array of shape ``(len(stream_indices), steps + 1, 3)``.
    """
    idx = _indices(stream_indices)
    out = np.empty((idx.size, grid.n_nodes, 3))
    out[:, 0] = 0.0
    for k, i in enumerate(idx):
        stream_generator(master_seed, i).standard_normal((grid.steps, 3), out=out[k, 1:])
    out[:, 1:] *= np.sqrt(params.diffusion * grid.dt)
    np.cumsum(out, axis=1, out=out)
    return out


def sample_wiener_path(grid: TimeGrid, params: WienerParams, stream: RngStream) -> Trajectory:
    pts = sample_wiener_paths(grid, params, stream.master_seed, [stream.stream_index])[0]
    return Trajectory(grid, pts)


def sample_ou_paths(grid: TimeGrid, params: OUParams, master_seed: int,
                    stream_indices: Sequence[int], init: str = "stationary") -> np.ndarray:
    """Isotropic OU paths via the exact conditional-Gaussian update.

    x(t + dt) = x(t) exp(-gamma dt) + eps sqrt(1 - exp(-2 gamma dt)) xi

    Each stream draws 3 initial normals followed by ``steps * 3`` innovations;
    the initial draw is discarded for ``init="fixed-origin"`` so both
    initialisations share the same innovations.
    """
    if init not in ("stationary", "fixed-origin"):
        raise InvalidArgumentError(f"unknown OU initialisation {init!r}")
    idx = _indices(stream_indices)
    eps = params.epsilon
    rho = np.exp(-params.gamma * grid.dt)
    scale = eps * np.sqrt(-np.expm1(-2.0 * params.gamma * grid.dt))

    u = np.empty((idx.size, grid.n_nodes, 3))
    for k, i in enumerate(idx):
        g = stream_generator(master_seed, i)
        x0 = g.standard_normal(3)
        u[k, 1:] = g.standard_normal((grid.steps, 3))
        u[k, 0] = eps * x0 if init == "stationary" else 0.0
    u[:, 1:] *= scale
    # AR(1) recursion x_j = rho x_{j-1} + u_j with x_0 = u_0
    return lfilter([1.0], [1.0, -rho], u, axis=1)


def sample_ou_path(grid: TimeGrid, params: OUParams, stream: RngStream,
                   init: str = "stationary") -> Trajectory:
    pts = sample_ou_paths(grid, params, stream.master_seed, [stream.stream_index], init)[0]
    return Trajectory(grid, pts)


# -----------------------------------------------------------------------------
# Drift loops
# -----------------------------------------------------------------------------

def drift_position(loop: DriftLoop, t, T: float) -> np.ndarray:
    """Position of the noiseless loop at time(s) ``t``; shape ``(..., 3)``."""
    t = np.asarray(t, dtype=float)
    if T <= 0:
        raise InvalidArgumentError(f"total time must be positive, got {T}")
    if np.any(t < 0) or np.any(t > T):
        raise InvalidArgumentError(f"time outside [0, {T}]")
    if isinstance(loop, TrivialDrift):
        return np.broadcast_to(np.asarray(loop.point, dtype=float), t.shape + (3,)).copy()
    if isinstance(loop, PrecessionDrift):
        phi = loop.phi0 + 2.0 * np.pi * loop.turns * t / T
        return np.moveaxis(_sphere_point(loop.theta0, phi), 0, -1)
    raise InvalidArgumentError(f"unknown drift loop {loop!r}")


def drift_path(loop: DriftLoop, grid: TimeGrid) -> np.ndarray:
    pts = drift_position(loop, grid.times, grid.total_time)
    if isinstance(loop, PrecessionDrift):
        pts[-1] = pts[0]  # closed exactly, not just up to rounding
    return pts


def compose_trajectory(loop: DriftLoop, noise: Trajectory,
                       grid: TimeGrid | None = None) -> Trajectory:
    """Pointwise sum of the drift loop and a noise path on ``grid``."""
    if not isinstance(noise, Trajectory):
        raise InvalidArgumentError("noise must be a Trajectory")
    if grid is not None and grid != noise.grid:
        raise InvalidArgumentError(f"noise grid {noise.grid} does not match {grid}")
    return Trajectory(noise.grid, drift_path(loop, noise.grid) + noise.points)
