"""Gauge invariance and the straight-chord closure.

An open path has no gauge-invariant line integral on its own.  Closing it
with the straight chord back to the start fixes that.  On a closed loop
the chord vanishes and the phase is minus the enclosed flux.  On a sampled
loop the asymmetric and symmetric gauges differ by half of sum(dx dy),
which shrinks like 1/n.
"""

import numpy as np

from diracphase.fields import Monopole, UniformAsymmetric, UniformSymmetric
from diracphase.paths import PrecessionDrift, Trajectory, drift_path, make_time_grid
from diracphase.phase import gauge_invariant_phase


def ellipse(n, a=1.0, b=0.5, tilt=0.6):
    g = make_time_grid(1.0, n)
    t = 2 * np.pi * g.times
    x, y = a * np.cos(t), b * np.sin(t)
    c, s = np.cos(tilt), np.sin(tilt)
    pts = np.column_stack([c * x - s * y, s * x + c * y, np.zeros_like(x)])
    pts[-1] = pts[0]
    return Trajectory(g, pts)


print("tilted ellipse, area pi/2")
for n in (100, 1_000, 10_000):
    tr = ellipse(n)
    a = gauge_invariant_phase(UniformAsymmetric(), tr).phase_angle
    s = gauge_invariant_phase(UniformSymmetric(), tr).phase_angle
    print(f"  n = {n:6d}  asym {a:+.6f}  sym {s:+.6f}  gap {abs(a - s):.2e}")

theta0 = np.arccos(1 / np.sqrt(3))
g = make_time_grid(1.0, 10_000)
loop = Trajectory(g, drift_path(PrecessionDrift(theta0), g))
phi = gauge_invariant_phase(Monopole(), loop).phase_angle
print(f"\nprecession loop around a monopole: {phi:+.6f}, "
      f"solid angle {2 * np.pi * (1 - np.cos(theta0)):.6f}")

# an open path: the chord carries the gauge dependence of the open integral;
# what is left between gauges is the sampled half sum(dx dy)
rng = np.random.default_rng(0)
g = make_time_grid(1.0, 2000)
walk = Trajectory(g, np.cumsum(rng.normal(0, 0.02, (2001, 3)), axis=0))
for fld in (UniformAsymmetric(), UniformSymmetric()):
    s = gauge_invariant_phase(fld, walk)
    print(f"{type(fld).__name__:>17}: open {s.open_path_integral:+.5f}  "
          f"chord {s.closure_integral:+.5f}  phase {s.phase_angle:+.5f}")
d = np.diff(walk.points, axis=0)
print(f"half sum(dx dy) = {0.5 * np.sum(d[:, 0] * d[:, 1]):+.5f}")
