"""Square-root growth of the phase spread, and the precession transient.

An OU particle (eps = 0.05, gamma = 1) fluctuates about a point on the unit
sphere around a monopole.  Sweeping N = gamma T and fitting
sigma = a sqrt(N) + b gives a close to eps^2.

Adding a slow precession of the base point around the z axis changes the
picture at small N: an extra contribution decaying roughly like 1/N makes
the spread fall first, with a shallow minimum near N ~ 150 before the
sqrt(N) growth takes over.
"""

import numpy as np

from diracphase.montecarlo import ExperimentConfig, fit_sqrt_law, sweep_variance

N_values = (5, 10, 20, 50, 100, 200, 800)
for drift in ("trivial", "precession"):
    base = ExperimentConfig.with_epsilon(0.05, field="monopole", noise="ou", drift=drift, T=5.0,
                                         steps=50, samples=3_000, seed=7, gamma=1.0,
                                         theta0=np.arccos(1 / np.sqrt(3)))
    pts = sweep_variance(base, N_values)
    print(f"drift = {drift}")
    for p in pts:
        print(f"  N = {p.N:5.0f}   sigma = {p.sigma:.5f} +/- {p.sigma_stderr:.5f}")
    if drift == "trivial":
        fit = fit_sqrt_law(pts)
        print(f"  fit: a = {fit.a:.5f} (eps^2 = {0.05 ** 2:.5f}), b = {fit.b:+.5f}")
