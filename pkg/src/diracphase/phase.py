"""Gauge-invariant Dirac phase of an open trajectory.

The phase of a trajectory r(t), t in [0, T], is

    phase = -coupling * ( int_r A . dr  +  int_G A . dr )

where the first integral is the Ito (left-endpoint) sum over the sampled
nodes and G is the straight chord from r(T) back to r(0).  With the default
``coupling = 1`` and A = (-y, 0, 0) this reduces to

    phase = int y dx + (x(0) - x(T)) (y(0) + y(T)) / 2

and for a counterclockwise loop the phase equals minus the enclosed flux.
The sign convention lives here only; every second moment is independent
of it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import (
    FieldModel, LinearCoefficients, LinearizedMonopole, SingularRegionError,
    UniformAsymmetric, potential, singular_mask,
)
from .paths import InvalidArgumentError, Trajectory

DEFAULT_QUAD_STEPS = 64


@dataclass(frozen=True)
class PhaseConvention:
    coupling: float = 1.0


@dataclass(frozen=True)
class PhaseSample:
    open_path_integral: float
    closure_integral: float
    phase_angle: float
    delta_x: float
    delta_y: float
    delta_z: float
    delta: float   # x(0) - x(T)
    sigma: float   # y(0) + y(T)


def _points(traj) -> np.ndarray:
    pts = traj.points if isinstance(traj, Trajectory) else np.asarray(traj, dtype=float)
    if pts.ndim < 2 or pts.shape[-1] != 3 or pts.shape[-2] < 1:
        raise InvalidArgumentError(f"expected points of shape (..., n + 1, 3), got {pts.shape}")
    return pts


def _integrand_nodes(pts: np.ndarray) -> np.ndarray:
    # Ito: the integrand is frozen at the start of each increment
    return pts[..., :-1, :]


def _ito_sum(fld: FieldModel, pts: np.ndarray) -> np.ndarray:
    A = potential(fld, _integrand_nodes(pts))
    dr = np.diff(pts, axis=-2)
    return (A * dr).sum(axis=-1).sum(axis=-1)


def ito_line_integral(fld: FieldModel, traj) -> float:
    """Left-endpoint sum  sum_j A(r_j) . (r_{j+1} - r_j)  along the trajectory."""
    pts = _points(traj)
    bad = singular_mask(fld, pts[..., :-1, :])
    if np.any(bad):
        j = int(np.flatnonzero(bad.ravel())[0]) % max(bad.shape[-1], 1)
        raise SingularRegionError(j, pts.reshape(-1, 3)[j])
    out = _ito_sum(fld, pts)
    return float(out) if out.ndim == 0 else out


def _chord_nodes(r_end, r_start, quad_steps):
    s = (np.arange(quad_steps) + 0.5) / quad_steps
    d = r_start - r_end
    return r_end[..., None, :] + s[:, None] * d[..., None, :], d


def _closure(fld: FieldModel, r_end, r_start, quad_steps: int):
    """Chord integral from r_end to r_start and a singular-chord mask."""
    r_end = np.asarray(r_end, dtype=float)
    r_start = np.asarray(r_start, dtype=float)
    if isinstance(fld, UniformAsymmetric):
        delta = r_start[..., 0] - r_end[..., 0]
        sigma = r_start[..., 1] + r_end[..., 1]
        return -fld.B * delta * sigma / 2.0, np.zeros(delta.shape, dtype=bool)
    if int(quad_steps) != quad_steps or quad_steps < 1:
        raise InvalidArgumentError(f"quad_steps must be a positive integer, got {quad_steps}")
    nodes, d = _chord_nodes(r_end, r_start, int(quad_steps))
    A = potential(fld, nodes)
    val = (A * d[..., None, :]).sum(axis=-1).sum(axis=-1) / quad_steps
    return val, singular_mask(fld, nodes).any(axis=-1)


def geodesic_closure(fld: FieldModel, r_end, r_start,
                     quad_steps: int = DEFAULT_QUAD_STEPS) -> float:
    """Line integral of A along the straight chord from ``r_end`` to ``r_start``.

    Midpoint rule with ``quad_steps`` panels (exact for affine potentials);
    the asymmetric uniform gauge uses the closed form -B (x0 - xT)(y0 + yT) / 2.
    """
    val, bad = _closure(fld, r_end, r_start, quad_steps)
    if np.any(bad):
        raise SingularRegionError("closure", np.asarray(r_end))
    return float(val) if np.ndim(val) == 0 else val


def closure_linearized(coeffs: LinearCoefficients, r_start, r_end, base=None):
    """Closed-form chord contribution to the phase for the linearized monopole.

    With Delta_a = a(0) - a(T) this is

        [f0 - (f . Delta)/2] Delta_x - [g0 - (g . Delta)/2] Delta_y

    where f0, g0 are the expansion values at ``r_start``.  If the expansion
    point ``base`` differs from ``r_start`` the values are shifted to it.
    """
    r_start = np.asarray(r_start, dtype=float)
    r_end = np.asarray(r_end, dtype=float)
    d = r_start - r_end
    f0, g0 = coeffs.f0, coeffs.g0
    if base is not None:
        shift = r_start - np.asarray(base, dtype=float)
        f0 = f0 + shift @ coeffs.f_grad
        g0 = g0 + shift @ coeffs.g_grad
    return ((f0 - 0.5 * d @ coeffs.f_grad) * d[..., 0]
            - (g0 - 0.5 * d @ coeffs.g_grad) * d[..., 1])


def _closure_for_phase(fld, r_end, r_start, quad_steps):
    if isinstance(fld, LinearizedMonopole):
        val = -closure_linearized(fld.coeffs, r_start, r_end, base=fld.base)
        return val, np.zeros(np.shape(val), dtype=bool)
    return _closure(fld, r_end, r_start, quad_steps)


def phase_batch(fld: FieldModel, pts, coupling: float = 1.0,
                quad_steps: int = DEFAULT_QUAD_STEPS):
    """Phases for a stack of trajectories of shape ``(m, n + 1, 3)``.

    Returns ``(phase, open_integral, closure_integral, rejected)``.  Rejected
    rows (any node or chord node in the singular region) have NaN phase.
    """
    pts = _points(pts)
    bad = singular_mask(fld, pts[..., :-1, :]).any(axis=-1)
    with np.errstate(invalid="ignore"):
        open_int = _ito_sum(fld, pts)
        closure, chord_bad = _closure_for_phase(fld, pts[..., -1, :], pts[..., 0, :], quad_steps)
        phase = -coupling * (open_int + closure)
    rejected = bad | chord_bad | ~np.isfinite(phase)
    phase = np.where(rejected, np.nan, phase)
    return phase, open_int, closure, rejected


def gauge_invariant_phase(fld: FieldModel, traj, conv: PhaseConvention = PhaseConvention(),
                          quad_steps: int = DEFAULT_QUAD_STEPS) -> PhaseSample:
    pts = _points(traj)
    if pts.ndim != 2:
        raise InvalidArgumentError("gauge_invariant_phase takes a single trajectory")
    open_int = ito_line_integral(fld, pts)
    closure, bad = _closure_for_phase(fld, pts[-1], pts[0], quad_steps)
    if np.any(bad):
        raise SingularRegionError("closure", pts[-1])
    d = pts[0] - pts[-1]
    return PhaseSample(
        open_path_integral=open_int,
        closure_integral=float(closure),
        phase_angle=-conv.coupling * (open_int + float(closure)),
        delta_x=float(d[0]), delta_y=float(d[1]), delta_z=float(d[2]),
        delta=float(d[0]), sigma=float(pts[0, 1] + pts[-1, 1]),
    )
