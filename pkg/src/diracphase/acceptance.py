"""Acceptance checks comparing simulation against the analytic oracles.

Each check returns a :class:`CheckResult`.  ``quick=True`` shrinks sample
counts so the whole table runs in well under a minute; tolerances are the
same in both modes, so a quick run can fail on statistics alone.
"""

from __future__ import annotations

import contextlib
import io
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.stats import qmc

from . import theory
from .fields import Monopole, UniformAsymmetric, UniformSymmetric, curl_check, monopole_field
from .montecarlo import (
    ExperimentConfig, estimate_moments, fit_sqrt_law, run_experiment, sweep_variance,
)
from .paths import PrecessionDrift, Trajectory, drift_path, make_time_grid
from .phase import gauge_invariant_phase

THETA0 = float(np.arccos(1.0 / np.sqrt(3.0)))
SQRT_LAW_N = (5, 10, 20, 50, 100, 200)
SQRT_LAW_A = 0.0025


@dataclass
class CheckResult:
    key: str
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        return (f"[{'PASS' if self.passed else 'FAIL'}] {self.key:>3} {self.name}: "
                f"{self.detail} ({self.seconds:.1f} s)")


def _z(value, target, se):
    return abs(value - target) / se if se > 0 else (0.0 if value == target else np.inf)


_cache: dict = {}


def _moments(cfg: ExperimentConfig):
    if cfg not in _cache:
        t0 = time.perf_counter()
        est = estimate_moments(run_experiment(cfg), cfg.bootstrap, resample_seed=cfg.seed)
        _cache[cfg] = (est, time.perf_counter() - t0)
    return _cache[cfg]


def clear_cache():
    _cache.clear()


# -----------------------------------------------------------------------------
# Monte Carlo oracles
# -----------------------------------------------------------------------------

def _wiener_uniform(T, quick):
    # one seed per T: with a shared seed the runs are exact rescalings of each other
    seed = {0.5: 1001, 1.0: 1002, 2.0: 1005}[T]
    return ExperimentConfig(field="uniform-asym", noise="wiener", drift="trivial", T=T,
                            steps=1000, samples=10_000 if quick else 100_000, seed=seed,
                            Bx=1.0, By=1.0, Bz=0.0)


def check_wiener_variance(quick=False) -> CheckResult:
    parts, ok, total = [], True, 0.0
    for T in (0.5, 1.0, 2.0):
        est, secs = _moments(_wiener_uniform(T, quick))
        total += secs
        target = theory.wiener_uniform_moments(1.0, 1.0, T).variance
        z = _z(est.variance, target, est.stderr_variance)
        ok &= z <= 3.0
        parts.append(f"T={T:g}: {est.variance:.5f} vs {target:.5f} ({z:.2f} se)")
    ok &= total < 60.0
    return CheckResult("1", "Wiener/uniform variance", bool(ok),
                       "; ".join(parts) + f"; runtime {total:.1f} s < 60 s")


def check_wiener_mean(quick=False) -> CheckResult:
    parts, ok = [], True
    for T in (0.5, 1.0, 2.0):
        est, _ = _moments(_wiener_uniform(T, quick))
        z = _z(est.mean, 0.0, est.stderr_mean)
        ok &= z < 3.0
        parts.append(f"T={T:g}: {est.mean:+.5f} ({z:.2f} se)")
    return CheckResult("2", "Wiener/uniform mean", bool(ok), "; ".join(parts))


def check_ou_scaling(quick=False) -> CheckResult:
    eps, gamma = 0.1, 50.0
    ests = {}
    for T, seed in ((1.0, 1003), (2.0, 1006)):
        cfg = ExperimentConfig.with_epsilon(
            eps, field="uniform-asym", noise="ou", drift="trivial", T=T,
            steps=int(500 * T), samples=10_000 if quick else 100_000, seed=seed, gamma=gamma)
        ests[T], _ = _moments(cfg)
    v1, v2 = ests[1.0].variance, ests[2.0].variance
    ratio = v2 / v1
    ratio_se = ratio * np.hypot(ests[1.0].stderr_variance / v1, ests[2.0].stderr_variance / v2)
    # two-point fit of var = alpha eps^4 (gamma T + beta)
    alpha = (v2 - v1) / (eps ** 4 * gamma * (2.0 - 1.0))
    beta = v1 / (alpha * eps ** 4) - gamma * 1.0
    ok = abs(ratio - 2.0) <= 0.2
    return CheckResult(
        "3", "OU/uniform sqrt(T) scaling", bool(ok),
        f"var ratio {ratio:.3f} +/- {ratio_se:.3f} (need 2.0 +/- 0.2); "
        f"fit alpha={alpha:.3f}, beta={beta:.2f} (reference form 2, 1; Ito calculus 1, 0.5)")


def _monopole_linear_config(quick, Bx=1.0, By=1.0, Bz=1.0, phi0=0.0, samples=100_000, seed=1004):
    return ExperimentConfig(field="monopole-linear", noise="wiener", drift="trivial", T=1.0,
                            steps=1000, samples=samples // 10 if quick else samples, seed=seed,
                            Bx=Bx, By=By, Bz=Bz, theta0=THETA0, phi0=phi0)


def check_monopole_moments(quick=False) -> CheckResult:
    cfg = _monopole_linear_config(quick)
    est, secs = _moments(cfg)
    coeffs = cfg.field_model().coeffs
    pub = theory.monopole_wiener_moments(coeffs, 1.0, 1.0, 1.0, 1.0)
    ito = theory.monopole_wiener_moments_exact(coeffs, 1.0, 1.0, 1.0, 1.0)
    zm = _z(est.mean, pub.mean, est.stderr_mean)
    zv = _z(est.variance, pub.variance, est.stderr_variance)
    zi = _z(est.variance, ito.variance, est.stderr_variance)
    ok = zm <= 3.0 and zv <= 3.0 and secs < 120.0
    return CheckResult(
        "4", "monopole/Wiener moments", bool(ok),
        f"mean {est.mean:+.5f} vs {pub.mean:+.5f} ({zm:.2f} se); "
        f"variance {est.variance:.5f} vs calB T^2/4 = {pub.variance:.5f} ({zv:.1f} se) "
        f"[Ito oracle {ito.variance:.5f}: {zi:.2f} se]; runtime {secs:.1f} s < 120 s")


def _sqrt_law_base(drift, quick):
    return ExperimentConfig.with_epsilon(
        0.05, field="monopole", noise="ou", drift=drift, T=5.0, steps=50,
        samples=2_000 if quick else 20_000, seed=7, gamma=1.0, theta0=THETA0)


def _sqrt_law_sweep(drift, quick):
    key = ("sweep", drift, quick)
    if key not in _cache:
        t0 = time.perf_counter()
        pts = sweep_variance(_sqrt_law_base(drift, quick), SQRT_LAW_N)
        _cache[key] = (pts, time.perf_counter() - t0)
    return _cache[key]


def check_sqrt_law_fit(quick=False) -> CheckResult:
    pts, secs = _sqrt_law_sweep("trivial", quick)
    fit = fit_sqrt_law(pts)
    ok = abs(fit.a - SQRT_LAW_A) <= 0.2 * SQRT_LAW_A and secs < 600.0
    sig = ", ".join(f"{p.sigma:.5f}" for p in pts)
    return CheckResult(
        "5", "square-root law, OU on monopole", bool(ok),
        f"a={fit.a:.6f} +/- {fit.a_stderr:.1g} (target {SQRT_LAW_A} +/- 20%), b={fit.b:+.6f}; "
        f"sigma=[{sig}]; runtime {secs:.1f} s < 600 s")


def check_transient(quick=False) -> CheckResult:
    pts, _ = _sqrt_law_sweep("precession", quick)
    s = np.array([p.sigma for p in pts])
    se = np.array([p.sigma_stderr for p in pts])
    drop = (s[0] - s[1]) / np.hypot(se[0], se[1])
    k = int(np.argmin(s))
    rise = (s[-1] - s[k]) / np.hypot(se[-1], se[k]) if k < len(s) - 1 else 0.0
    ok = drop > 3.0 and k < len(s) - 1
    sig = ", ".join(f"{v:.5f}" for v in s)
    return CheckResult(
        "6", "precession transient", bool(ok),
        f"sigma=[{sig}]; initial drop {drop:.1f} se; minimum at N={pts[k].N:g}, "
        f"rise to N={pts[-1].N:g} {rise:.1f} se")


# -----------------------------------------------------------------------------
# Deterministic geometry
# -----------------------------------------------------------------------------

def _loop(n, a=1.0, b=1.0, tilt=0.0, centre=(0.0, 0.0)):
    grid = make_time_grid(1.0, n)
    th = 2 * np.pi * grid.times
    x, y = a * np.cos(th), b * np.sin(th)
    c, s = np.cos(tilt), np.sin(tilt)
    pts = np.stack([centre[0] + c * x - s * y, centre[1] + s * x + c * y, np.zeros_like(x)], -1)
    pts[-1] = pts[0]
    return Trajectory(grid, pts)


def gauge_difference(traj) -> float:
    return abs(gauge_invariant_phase(UniformAsymmetric(), traj).phase_angle
               - gauge_invariant_phase(UniformSymmetric(), traj).phase_angle)


def check_gauge_invariance(quick=False) -> CheckResult:
    circ = [gauge_difference(_loop(n)) for n in (1000, 10_000)]
    # the circle's discrete gauge gap cancels by symmetry, so the rate is
    # measured on a tilted ellipse where it does not
    ell = [gauge_difference(_loop(n, 1.0, 0.5, 0.6, (0.3, -0.2))) for n in (1000, 10_000)]
    expo = np.log10(ell[0] / ell[1])
    ok = max(circ) <= 1e-2 and ell[0] <= 1e-2 and 0.8 <= expo <= 1.2
    return CheckResult(
        "7", "gauge invariance", bool(ok),
        f"circle |diff| {circ[0]:.1e} / {circ[1]:.1e}; ellipse |diff| {ell[0]:.2e} -> "
        f"{ell[1]:.2e}, exponent {expo:.3f} in [0.8, 1.2]")


def check_geometry(quick=False) -> CheckResult:
    circ = gauge_invariant_phase(UniformAsymmetric(), _loop(10_000)).phase_angle
    grid = make_time_grid(1.0, 10_000)
    prec = Trajectory(grid, drift_path(PrecessionDrift(THETA0), grid))
    ph = gauge_invariant_phase(Monopole(), prec).phase_angle
    target = theory.noiseless_precession_phase(THETA0)
    e1, e2 = abs(circ + np.pi), abs(abs(ph) - target)
    return CheckResult(
        "8", "geometry oracles", bool(e1 <= 1e-2 and e2 <= 1e-3),
        f"circle {circ:.6f} vs -pi (err {e1:.1e} <= 1e-2); precession |{ph:.6f}| vs "
        f"{target:.6f} (err {e2:.1e} <= 1e-3)")


def monopole_test_points(n=100) -> np.ndarray:
    """Quasi-random points with R in [0.5, 2] and z/R in [-0.9, 0.99]."""
    u = qmc.Halton(d=3, scramble=False).random(n + 1)[1:]
    R = 0.5 + 1.5 * u[:, 0]
    cos_t = -0.9 + 1.89 * u[:, 1]
    phi = 2 * np.pi * u[:, 2]
    sin_t = np.sqrt(1 - cos_t ** 2)
    return np.column_stack([R * sin_t * np.cos(phi), R * sin_t * np.sin(phi), R * cos_t])


def check_curl(quick=False) -> CheckResult:
    r = monopole_test_points(100)
    dev = np.abs(curl_check(Monopole(), r, 1e-4) - monopole_field(r)).max()
    return CheckResult("9", "monopole curl", bool(dev < 1e-3),
                       f"max |curl A - r/R^3| = {dev:.2e} over 100 points (< 1e-3)")


def check_determinism(quick=False) -> CheckResult:
    from .cli import main

    text = ("field = monopole\nnoise = ou\ndrift = precession\nT = 2\nsteps = 40\n"
            "samples = 3000\nseed = 424242\ngamma = 5\nepsilon = 0.05\n"
            f"theta0 = {THETA0!r}\nbootstrap = 50\n")
    blobs = {}
    with tempfile.TemporaryDirectory() as tmp:
        cfg = Path(tmp, "cfg.txt")
        cfg.write_text(text)
        for w in (1, 8):
            out = Path(tmp, f"w{w}")
            with contextlib.redirect_stdout(io.StringIO()):
                code = main(["simulate", "--config", str(cfg), "--out-dir", str(out),
                             "--workers", str(w)])
            blobs[w] = (code, (out / "summary.csv").read_bytes(),
                        (out / "ensemble.csv").read_bytes())
    same = blobs[1] == blobs[8] and blobs[1][0] == 0
    return CheckResult("10", "determinism across workers", bool(same),
                       "summary.csv and ensemble.csv byte-identical for workers 1 and 8"
                       if same else "outputs differ between worker counts")


# -----------------------------------------------------------------------------
# Supplementary Ito-sensitive oracle
# -----------------------------------------------------------------------------

def check_ito_mean(quick=False) -> CheckResult:
    """Anisotropic diffusion makes the mean sensitive to the Ito evaluation point."""
    cfg = _monopole_linear_config(quick, Bx=1.0, By=0.25, Bz=0.5, phi0=np.pi / 4,
                                  samples=40_000, seed=1011)
    cfg = ExperimentConfig(**{**cfg.__dict__, "steps": 200})
    est, _ = _moments(cfg)
    coeffs = cfg.field_model().coeffs
    ito = theory.monopole_wiener_moments_exact(coeffs, 1.0, 0.25, 0.5, 1.0)
    zm = _z(est.mean, ito.mean, est.stderr_mean)
    zv = _z(est.variance, ito.variance, est.stderr_variance)
    return CheckResult("S1", "monopole mean/variance, anisotropic (Ito)",
                       bool(zm <= 3.0 and zv <= 3.0),
                       f"mean {est.mean:+.5f} vs {ito.mean:+.5f} ({zm:.2f} se); variance "
                       f"{est.variance:.5f} vs {ito.variance:.5f} ({zv:.2f} se)")


CHECKS: tuple[Callable[..., CheckResult], ...] = (
    check_wiener_variance, check_wiener_mean, check_ou_scaling, check_monopole_moments,
    check_sqrt_law_fit, check_transient, check_gauge_invariance, check_geometry, check_curl,
    check_determinism, check_ito_mean,
)


def run_all(quick=False, progress=None) -> list[CheckResult]:
    results = []
    for check in CHECKS:
        t0 = time.perf_counter()
        res = check(quick)
        res.seconds = time.perf_counter() - t0
        results.append(res)
        if progress:
            progress(res)
    return results


def format_table(results) -> str:
    w = max(len(r.name) for r in results)
    lines = [f"{'#':>3}  {'check':<{w}}  result", f"{'-' * 3}  {'-' * w}  ------"]
    lines += [f"{r.key:>3}  {r.name:<{w}}  {'PASS' if r.passed else 'FAIL'}" for r in results]
    n_ok = sum(r.passed for r in results)
    lines.append(f"{n_ok}/{len(results)} checks passed")
    return "\n".join(lines)
