"""Brownian noise near a magnetic monopole.

Close to a base point the monopole potential is replaced by its first-order
expansion.  Mean and variance of the phase then follow from Ito calculus.
The variance depends only on the field at the base point (the curl of the
linear potential), which makes it gauge invariant.  The reference formula
in ``monopole_wiener_moments`` keeps gauge-dependent terms and comes out
about twice as large; the simulation sides with the Ito result.
"""

import numpy as np

from diracphase.montecarlo import ExperimentConfig, estimate_moments, run_experiment
from diracphase.theory import monopole_wiener_moments, monopole_wiener_moments_exact

theta0 = np.arccos(1 / np.sqrt(3))
for Bx, By, Bz, phi0 in [(1.0, 1.0, 1.0, 0.0), (1.0, 0.25, 0.5, np.pi / 4)]:
    cfg = ExperimentConfig(field="monopole-linear", noise="wiener", drift="trivial", T=1.0,
                           steps=200, samples=20_000, seed=300, Bx=Bx, By=By, Bz=Bz,
                           theta0=theta0, phi0=phi0)
    k = cfg.field_model().coeffs
    est = estimate_moments(run_experiment(cfg))
    ito = monopole_wiener_moments_exact(k, Bx, By, Bz, 1.0)
    ref = monopole_wiener_moments(k, Bx, By, Bz, 1.0)
    print(f"B = ({Bx}, {By}, {Bz}), phi0 = {phi0:.3f}")
    print(f"  mean     sim {est.mean:+.4f} +/- {est.stderr_mean:.4f}   Ito {ito.mean:+.4f}")
    print(f"  variance sim {est.variance:.4f} +/- {est.stderr_variance:.4f}   "
          f"Ito {ito.variance:.4f}   reference {ref.variance:.4f}")
