"""Brownian noise in a uniform field.

A particle sits at the origin of a uniform field B = 1 and wanders with
diffusion constants Bx = By = 1.  The gauge-invariant phase has mean zero and
variance Bx By T^2 / 4, so its spread grows linearly in T.  We check that,
then show the same ensemble computed in the symmetric gauge.
"""

import numpy as np

from diracphase.montecarlo import ExperimentConfig, estimate_moments, run_experiment
from diracphase.theory import wiener_uniform_moments

print(f"{'T':>5} {'mean':>10} {'variance':>10} {'theory':>10} {'z':>6}")
for T in (0.5, 1.0, 2.0):
    cfg = ExperimentConfig(field="uniform-asym", noise="wiener", drift="trivial", T=T,
                           steps=400, samples=20_000, seed=int(100 * T), Bx=1.0, By=1.0)
    est = estimate_moments(run_experiment(cfg))
    ref = wiener_uniform_moments(1.0, 1.0, T)
    z = (est.variance - ref.variance) / est.stderr_variance
    print(f"{T:5.1f} {est.mean:+10.4f} {est.variance:10.4f} {ref.variance:10.4f} {z:+6.2f}")

# Same noise, other gauge.  Per path the two differ by half of sum(dx dy),
# which is of order sqrt(T dt) and averages to zero.
base = dict(noise="wiener", drift="trivial", T=1.0, steps=400, samples=5_000, seed=1,
            Bx=1.0, By=1.0)
a = run_experiment(ExperimentConfig(field="uniform-asym", **base)).phases
s = run_experiment(ExperimentConfig(field="uniform-sym", **base)).phases
gap = a - s
print(f"\ngauge gap: mean {gap.mean():+.2e}, rms {gap.std():.2e}, sqrt(T dt) / 2 = {0.5 * np.sqrt(1 / 400):.2e}")
