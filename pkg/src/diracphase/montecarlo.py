"""Ensembles of noisy-trajectory phases, moment estimates, sweeps and fits.

Trajectories are processed in fixed-size chunks of consecutive indices.  The
chunk boundaries depend only on the sample count, never on the number of
workers, and every per-trajectory computation is row-local, so an ensemble
is bit-identical for any degree of parallelism.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from . import fields, paths
from .phase import DEFAULT_QUAD_STEPS, phase_batch

log = logging.getLogger(__name__)

CHUNK_SIZE = 256
MAX_REJECTION_RATE = 0.01

FIELDS = ("uniform-asym", "uniform-sym", "monopole", "monopole-linear")
NOISES = ("wiener", "ou")
DRIFTS = ("trivial", "precession")


class RunAbortedError(RuntimeError):
    def __init__(self, rejected: int, samples: int):
        self.rejected = rejected
        self.samples = samples
        self.rate = rejected / samples
        super().__init__(f"run aborted: {rejected}/{samples} samples "
                         f"({100 * self.rate:.2f}%) hit the singular region")


@dataclass(frozen=True)
class ExperimentConfig:
    field: str
    noise: str
    drift: str
    T: float
    steps: int
    samples: int
    seed: int
    coupling: float = 1.0
    Bx: float = 0.0
    By: float = 0.0
    Bz: float = 0.0
    gamma: Optional[float] = None
    D: Optional[float] = None
    theta0: float = 0.0
    phi0: float = 0.0
    turns: int = 1
    quad_steps: int = DEFAULT_QUAD_STEPS
    bootstrap: int = 200
    ou_init: str = "stationary"
    B: float = 1.0

    def __post_init__(self):
        if self.field not in FIELDS:
            raise paths.InvalidArgumentError(f"field must be one of {FIELDS}, got {self.field!r}")
        if self.noise not in NOISES:
            raise paths.InvalidArgumentError(f"noise must be one of {NOISES}, got {self.noise!r}")
        if self.drift not in DRIFTS:
            raise paths.InvalidArgumentError(f"drift must be one of {DRIFTS}, got {self.drift!r}")
        if int(self.samples) != self.samples or self.samples < 1:
            raise paths.InvalidArgumentError(f"samples must be >= 1, got {self.samples}")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise paths.InvalidArgumentError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.quad_steps < 1 or self.bootstrap < 1:
            raise paths.InvalidArgumentError("quad_steps and bootstrap must be >= 1")
        # constructing the pieces runs every downstream precondition
        self.grid()
        self.noise_params()
        self.drift_loop()
        self.field_model()

    @classmethod
    def with_epsilon(cls, epsilon: float, **kw) -> "ExperimentConfig":
        return cls(D=2.0 * kw["gamma"] * epsilon ** 2, **kw)

    def grid(self) -> paths.TimeGrid:
        return paths.make_time_grid(self.T, self.steps)

    def noise_params(self):
        if self.noise == "wiener":
            return paths.WienerParams(self.Bx, self.By, self.Bz)
        if self.gamma is None or self.D is None:
            raise paths.InvalidArgumentError("OU noise needs gamma and D (or epsilon)")
        return paths.OUParams(self.gamma, self.D)

    def drift_loop(self) -> paths.DriftLoop:
        if self.drift == "trivial":
            return paths.TrivialDrift.on_sphere(self.theta0, self.phi0)
        return paths.PrecessionDrift(self.theta0, self.phi0, self.turns)

    def base_point(self) -> np.ndarray:
        return paths.drift_position(self.drift_loop(), 0.0, self.T)

    def field_model(self) -> fields.FieldModel:
        if self.field == "uniform-asym":
            return fields.UniformAsymmetric(self.B)
        if self.field == "uniform-sym":
            return fields.UniformSymmetric(self.B)
        if self.field == "monopole":
            return fields.Monopole()
        return fields.LinearizedMonopole.at(self.base_point())


@dataclass
class PhaseEnsemble:
    indices: np.ndarray
    phases: np.ndarray     # NaN where rejected
    rejected: int
    config: ExperimentConfig

    @property
    def accepted(self) -> np.ndarray:
        return self.phases[np.isfinite(self.phases)]


@dataclass(frozen=True)
class MomentEstimate:
    mean: float
    variance: float
    stderr_mean: float
    stderr_variance: float
    samples: int

    @property
    def sigma(self) -> float:
        return float(np.sqrt(self.variance))

    @property
    def stderr_sigma(self) -> float:
        # delta method: d sigma = d var / (2 sigma)
        return 0.0 if self.variance == 0 else self.stderr_variance / (2.0 * self.sigma)


def sample_noise(config: ExperimentConfig, indices) -> np.ndarray:
    grid = config.grid()
    params = config.noise_params()
    if config.noise == "wiener":
        return paths.sample_wiener_paths(grid, params, config.seed, indices)
    return paths.sample_ou_paths(grid, params, config.seed, indices, config.ou_init)


def chunk_phases(config: ExperimentConfig, start: int, stop: int) -> np.ndarray:
    """Phases of trajectories ``start .. stop - 1`` (NaN for rejected ones)."""
    pts = sample_noise(config, np.arange(start, stop))
    pts += paths.drift_path(config.drift_loop(), config.grid())
    phase, _, _, _ = phase_batch(config.field_model(), pts, config.coupling, config.quad_steps)
    return phase


def _chunk_task(args):
    return chunk_phases(*args)


def run_experiment(config: ExperimentConfig, workers: int = 1,
                   max_rejection_rate: float = MAX_REJECTION_RATE) -> PhaseEnsemble:
    M = config.samples
    bounds = [(s, min(s + CHUNK_SIZE, M)) for s in range(0, M, CHUNK_SIZE)]
    tasks = [(config, a, b) for a, b in bounds]
    if workers <= 1 or len(tasks) == 1:
        parts = [_chunk_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_chunk_task, tasks))
    phases = np.concatenate(parts)
    rejected = int(np.count_nonzero(~np.isfinite(phases)))
    if rejected > max_rejection_rate * M:
        raise RunAbortedError(rejected, M)
    if rejected:
        log.warning("%d of %d samples rejected (singular region)", rejected, M)
    return PhaseEnsemble(np.arange(M), phases, rejected, config)


def estimate_moments(ensemble, resamples: int = 200, resample_seed: int = 0) -> MomentEstimate:
    """Sample mean and unbiased variance with bootstrap standard errors.

    ``ensemble`` may be a PhaseEnsemble or a plain array of phases.  The
    bootstrap draws from its own generator seeded by ``resample_seed``.
    """
    x = ensemble.accepted if isinstance(ensemble, PhaseEnsemble) else np.asarray(ensemble, float)
    x = x[np.isfinite(x)]
    n = x.size
    if n < 2:
        raise paths.InvalidArgumentError(f"need at least 2 accepted samples, got {n}")
    if resamples < 2:
        raise paths.InvalidArgumentError("need at least 2 bootstrap resamples")
    rng = np.random.default_rng(resample_seed)
    boot_mean = np.empty(resamples)
    boot_var = np.empty(resamples)
    for b in range(resamples):
        xb = x[rng.integers(0, n, n)]
        boot_mean[b] = xb.mean()
        boot_var[b] = xb.var(ddof=1)
    return MomentEstimate(
        mean=float(x.mean()),
        variance=float(x.var(ddof=1)),
        stderr_mean=float(boot_mean.std(ddof=1)),
        stderr_variance=float(boot_var.std(ddof=1)),
        samples=n,
    )


@dataclass(frozen=True)
class SweepPoint:
    N: float
    sigma: float
    sigma_stderr: float
    T: float = float("nan")
    steps: int = 0
    moments: Optional[MomentEstimate] = field(default=None, compare=False)


def point_seed(master_seed: int, k: int) -> int:
    """Seed for the k-th sweep point, so points do not share random streams."""
    seq = np.random.SeedSequence([int(master_seed), int(k)])
    return int(seq.generate_state(1, np.uint64)[0])


def config_for_N(base: ExperimentConfig, N: float, k: int = 0) -> ExperimentConfig:
    """Config realising N noise fluctuations at fixed gamma and fixed dt.

    For OU noise T = N / gamma; for Brownian noise (no rate) T = N.  The step
    count is rescaled so that dt matches the base config, and the seed is
    replaced by ``point_seed(base.seed, k)``.
    """
    T = N / base.gamma if base.noise == "ou" else float(N)
    steps = max(1, int(round(base.steps * T / base.T)))
    return replace(base, T=T, steps=steps, seed=point_seed(base.seed, k))


def sweep_variance(base: ExperimentConfig, N_values: Sequence[float], workers: int = 1,
                   resample_seed: int = 0) -> list[SweepPoint]:
    N_values = [float(v) for v in N_values]
    if not N_values or any(v <= 0 for v in N_values):
        raise paths.InvalidArgumentError("N values must be positive")
    if any(b <= a for a, b in zip(N_values, N_values[1:])):
        raise paths.InvalidArgumentError("N values must be strictly increasing")
    out = []
    for k, N in enumerate(N_values):
        cfg = config_for_N(base, N, k)
        est = estimate_moments(run_experiment(cfg, workers), cfg.bootstrap, resample_seed)
        log.info("N=%g T=%g steps=%d sigma=%.6g", N, cfg.T, cfg.steps, est.sigma)
        out.append(SweepPoint(N, est.sigma, est.stderr_sigma, cfg.T, cfg.steps, est))
    return out


@dataclass(frozen=True)
class FitResult:
    a: float
    b: float
    residual_norm: float
    a_stderr: float = float("nan")
    b_stderr: float = float("nan")


def fit_sqrt_law(points) -> FitResult:
    """Ordinary least squares of sigma on (sqrt(N), 1).

    ``points`` is a sequence of SweepPoint or of ``(N, sigma)`` pairs.
    """
    if points and isinstance(points[0], SweepPoint):
        N = np.array([p.N for p in points], float)
        s = np.array([p.sigma for p in points], float)
    else:
        arr = np.asarray(points, float)
        N, s = arr[:, 0], arr[:, 1]
    if N.size < 3:
        raise paths.InvalidArgumentError(f"need at least 3 points, got {N.size}")
    if np.ptp(N) == 0:
        raise paths.InvalidArgumentError("all N values are equal; fit is degenerate")
    X = np.column_stack([np.sqrt(N), np.ones_like(N)])
    coef, _, _, _ = np.linalg.lstsq(X, s, rcond=None)
    resid = s - X @ coef
    dof = N.size - 2
    if dof > 0:
        cov = (resid @ resid / dof) * np.linalg.inv(X.T @ X)
        a_se, b_se = np.sqrt(np.diag(cov))
    else:
        a_se = b_se = float("nan")
    return FitResult(float(coef[0]), float(coef[1]), float(np.linalg.norm(resid)),
                     float(a_se), float(b_se))
