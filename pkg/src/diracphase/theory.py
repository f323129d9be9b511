"""Closed-form phase moments used as oracles for the Monte Carlo runs.

Two kinds of formula live here.  The ``*_moments`` / ``ou_uniform_variance``
functions return the reference expressions verbatim.  The ``*_exact``
functions are finite-T results of the Ito calculus for the same models;
they are what the simulator should reproduce when the two disagree.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import LinearCoefficients
from .paths import InvalidArgumentError

REGIME_THRESHOLD = 1e-3


@dataclass(frozen=True)
class AnalyticMoments:
    mean: float
    variance: float
    notes: str = ""
    regime_warning: bool = False

    @property
    def std(self) -> float:
        return float(np.sqrt(self.variance))


def _require(cond, msg):
    if not cond:
        raise InvalidArgumentError(msg)


def wiener_uniform_moments(Bx: float, By: float, T: float) -> AnalyticMoments:
    """Brownian noise in a uniform field: mean 0, variance Bx By T^2 / 4."""
    _require(Bx >= 0 and By >= 0, "diffusion constants must be >= 0")
    _require(T > 0, "T must be > 0")
    return AnalyticMoments(0.0, 0.25 * Bx * By * T * T)


def ou_uniform_variance(epsilon: float, gamma: float, T: float) -> AnalyticMoments:
    """Reference asymptotic OU result, variance 2 eps^4 (gamma T + 1).

    Only meaningful once exp(-gamma T) is negligible; ``regime_warning`` is
    set when exp(-gamma T) > 1e-3.  The constant is known to be off, see
    :func:`ou_uniform_variance_exact`.
    """
    _require(epsilon >= 0, "epsilon must be >= 0")
    _require(gamma > 0, "gamma must be > 0")
    _require(T > 0, "T must be > 0")
    N = gamma * T
    warn = bool(np.exp(-N) > REGIME_THRESHOLD)
    notes = "asymptotic in exp(-gamma T) -> 0; leading constant disputed"
    if warn:
        notes += f"; outside regime (exp(-gamma T) = {np.exp(-N):.3g})"
    return AnalyticMoments(0.0, 2.0 * epsilon ** 4 * (N + 1.0), notes, warn)


def ou_uniform_variance_exact(epsilon: float, gamma: float, T: float) -> AnalyticMoments:
    """Continuum variance for stationary isotropic OU noise in a uniform field.

        eps^4 [ N + (1 - e^{-2N}) / 2 - 2 N e^{-N} ],   N = gamma T

    Large-N form eps^4 (N + 1/2).
    """
    _require(epsilon >= 0, "epsilon must be >= 0")
    _require(gamma > 0, "gamma must be > 0")
    _require(T > 0, "T must be > 0")
    N = gamma * T
    var = epsilon ** 4 * (N - 0.5 * np.expm1(-2.0 * N) - 2.0 * N * np.exp(-N))
    return AnalyticMoments(0.0, float(var), "stationary initial condition")


def ou_uniform_variance_discrete(epsilon: float, gamma: float, T: float,
                                 steps: int) -> AnalyticMoments:
    """Exact variance of the sampled (left-endpoint) phase on a uniform grid.

    Sums the covariance series of the discrete sum directly, so it includes
    the O((gamma dt)^2) discretisation effect.  Cost is O(steps).
    """
    _require(steps >= 1, "steps must be >= 1")
    N = gamma * T
    h = N / steps
    e2 = epsilon ** 2
    q = np.exp(-h)
    n = steps
    k = np.arange(1, n)
    # Cov(y_i, y_j) = e2 q^|i-j|; Cov(dx_i, dx_j) = 2 e2 (1-q) at lag 0,
    # -e2 q^(k-1) (1-q)^2 at lag k >= 1
    s2 = n * e2 * e2 * 2 * (1 - q) - 2 * np.sum((n - k) * e2 * q ** k * e2 * q ** (k - 1) * (1 - q) ** 2)
    # Cov(Sigma, y_j) Cov(Delta, dx_j), Sigma = y_0 + y_n, Delta = x_0 - x_n
    j = np.arange(n)
    cy = e2 * (q ** j + q ** (n - j))
    # Cov(x_0 - x_n, x_{j+1} - x_j)
    cx = e2 * (q ** (j + 1) - q ** j - q ** (n - j - 1) + q ** (n - j))
    cross = np.sum(cy * cx)
    ends = 0.25 * (2 * e2 * (1 + q ** n)) * (2 * e2 * (1 - q ** n))
    return AnalyticMoments(0.0, float(s2 + cross + ends), "discrete left-endpoint sum")


def _check_wiener(Bx, By, Bz, T):
    _require(min(Bx, By, Bz) >= 0, "diffusion constants must be >= 0")
    _require(T > 0, "T must be > 0")


def monopole_wiener_moments(coeffs: LinearCoefficients, Bx: float, By: float,
                            Bz: float, T: float) -> AnalyticMoments:
    """Reference linearized-monopole moments under Brownian noise.

    mean = (gy By - fx Bx) T / 2, variance = calB T^2 / 4 with
    calB = Bx (3 Bx fx^2 + 2 By fy^2 + 2 Bz fz^2)
         + By (2 Bx gx^2 + 3 By gy^2 + 2 Bz gz^2).
    """
    _check_wiener(Bx, By, Bz, T)
    k = coeffs
    calB = (Bx * (3 * Bx * k.fx ** 2 + 2 * By * k.fy ** 2 + 2 * Bz * k.fz ** 2)
            + By * (2 * Bx * k.gx ** 2 + 3 * By * k.gy ** 2 + 2 * Bz * k.gz ** 2))
    mean = 0.5 * (k.gy * By - k.fx * Bx) * T
    return AnalyticMoments(float(mean), float(0.25 * calB * T * T), "reference form")


def monopole_wiener_moments_exact(coeffs: LinearCoefficients, Bx: float, By: float,
                                  Bz: float, T: float) -> AnalyticMoments:
    """Ito moments of the linearized-monopole phase under Brownian noise.

    The fx and gy terms are deterministic after closure; what fluctuates is a
    sum of uncorrelated Levy areas, giving

        variance = T^2 / 4 [ (fy + gx)^2 Bx By + fz^2 Bx Bz + gz^2 By Bz ].

    The three combinations are the curl of the linearized potential,
    (-gz, -fz, fy + gx), so the result is gauge invariant.
    """
    _check_wiener(Bx, By, Bz, T)
    k = coeffs
    var = 0.25 * T * T * ((k.fy + k.gx) ** 2 * Bx * By + k.fz ** 2 * Bx * Bz
                          + k.gz ** 2 * By * Bz)
    mean = 0.5 * (k.gy * By - k.fx * Bx) * T
    return AnalyticMoments(float(mean), float(var), "Ito calculus")


def noiseless_precession_phase(theta0: float) -> float:
    """Monopole flux through a loop at colatitude theta0: 2 pi (1 - cos theta0)."""
    _require(0 < theta0 < np.pi, f"theta0 must lie in (0, pi), got {theta0}")
    return float(2.0 * np.pi * (1.0 - np.cos(theta0)))
