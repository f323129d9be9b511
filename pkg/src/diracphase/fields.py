"""Vector potentials for a uniform field and for a unit magnetic monopole.

The monopole potential is written in the Cartesian form

    A . dr = (1 - z/R) / (x^2 + y^2) * (-y dx + x dy)

which carries its Dirac string along the negative z axis.  Points closer
than ``rho_min`` to the polar axis are treated as singular.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .paths import InvalidArgumentError

RHO_MIN = 1e-6


class SingularRegionError(ArithmeticError):
    """A point lies too close to the Dirac string (or at the origin)."""

    def __init__(self, node_index, point=None):
        self.node_index = node_index
        self.point = point
        msg = f"point {point} at node {node_index} is inside the singular region"
        super().__init__(msg)


@dataclass(frozen=True)
class UniformAsymmetric:
    """B = (0, 0, B) with A = (-y B, 0, 0)."""
    B: float = 1.0


@dataclass(frozen=True)
class UniformSymmetric:
    """B = (0, 0, B) with A = (-y B / 2, x B / 2, 0)."""
    B: float = 1.0


@dataclass(frozen=True)
class Monopole:
    rho_min: float = RHO_MIN

    def __post_init__(self):
        if not self.rho_min > 0:
            raise InvalidArgumentError(f"rho_min must be > 0, got {self.rho_min}")


@dataclass(frozen=True)
class LinearCoefficients:
    f0: float
    fx: float
    fy: float
    fz: float
    g0: float
    gx: float
    gy: float
    gz: float

    @property
    def f_grad(self) -> np.ndarray:
        return np.array([self.fx, self.fy, self.fz])

    @property
    def g_grad(self) -> np.ndarray:
        return np.array([self.gx, self.gy, self.gz])


@dataclass(frozen=True)
class LinearizedMonopole:
    """First-order Taylor expansion of the monopole potential about ``base``."""
    base: tuple
    coeffs: LinearCoefficients

    @classmethod
    def at(cls, base, rho_min: float = RHO_MIN) -> "LinearizedMonopole":
        base = tuple(float(v) for v in base)
        return cls(base, linearize_monopole(base, rho_min))


FieldModel = Union[UniformAsymmetric, UniformSymmetric, Monopole, LinearizedMonopole]


def _flat_first(mask: np.ndarray):
    flat = int(np.flatnonzero(mask.ravel())[0])
    return np.unravel_index(flat, mask.shape) if mask.ndim > 1 else flat


def singular_mask(fld: FieldModel, r) -> np.ndarray:
    """Boolean mask (shape ``r.shape[:-1]``) of points outside the field's domain."""
    r = np.asarray(r, dtype=float)
    if isinstance(fld, Monopole):
        rho2 = r[..., 0] ** 2 + r[..., 1] ** 2
        return ~(rho2 >= fld.rho_min ** 2)
    return np.zeros(r.shape[:-1], dtype=bool)


def _monopole_c(r):
    x, y, z = r[..., 0], r[..., 1], r[..., 2]
    rho2 = x * x + y * y
    R = np.sqrt(rho2 + z * z)
    return (1.0 - z / R) / rho2


def potential(fld: FieldModel, r) -> np.ndarray:
    """Vectorised A(r) without domain checks.

    Singular monopole points come back as non-finite values; callers that
    care use :func:`singular_mask` or :func:`evaluate_potential`.
    """
    r = np.asarray(r, dtype=float)
    x, y = r[..., 0], r[..., 1]
    out = np.zeros(r.shape)
    if isinstance(fld, UniformAsymmetric):
        out[..., 0] = -fld.B * y
    elif isinstance(fld, UniformSymmetric):
        out[..., 0] = -0.5 * fld.B * y
        out[..., 1] = 0.5 * fld.B * x
    elif isinstance(fld, Monopole):
        with np.errstate(divide="ignore", invalid="ignore"):
            c = _monopole_c(r)
            c = np.where(singular_mask(fld, r), np.nan, c)
        out[..., 0] = -c * y
        out[..., 1] = c * x
    elif isinstance(fld, LinearizedMonopole):
        k = fld.coeffs
        d = r - np.asarray(fld.base, dtype=float)
        out[..., 0] = -(k.f0 + d @ k.f_grad)
        out[..., 1] = k.g0 + d @ k.g_grad
    else:
        raise InvalidArgumentError(f"unknown field model {fld!r}")
    return out


def evaluate_potential(fld: FieldModel, r) -> np.ndarray:
    """A(r) for one point or an array of points of shape ``(..., 3)``.

    Raises SingularRegionError, carrying the index of the first offending
    point, if any point is within ``rho_min`` of the monopole's polar axis.
    """
    r = np.asarray(r, dtype=float)
    if r.shape[-1:] != (3,):
        raise InvalidArgumentError(f"points must have a trailing dimension of 3, got {r.shape}")
    bad = singular_mask(fld, r)
    if np.any(bad):
        idx = _flat_first(bad)
        raise SingularRegionError(idx, r[idx] if r.ndim > 1 else r)
    return potential(fld, r)


def monopole_field(r) -> np.ndarray:
    """B = r / R^3 for the unit monopole."""
    r = np.asarray(r, dtype=float)
    R = np.linalg.norm(r, axis=-1, keepdims=True)
    return r / R ** 3


def linearize_monopole(base, rho_min: float = RHO_MIN) -> LinearCoefficients:
    """Value and gradient of f = c y and g = c x at ``base``.

    Here c(r) = (1 - z/R) / (x^2 + y^2), so the monopole potential is
    A = (-f, g, 0).
    """
    x, y, z = (float(v) for v in base)
    rho2 = x * x + y * y
    if not rho2 >= rho_min ** 2:
        raise SingularRegionError(0, np.array([x, y, z]))
    R = np.sqrt(rho2 + z * z)
    c = (1.0 - z / R) / rho2
    # dc/dx = x k, dc/dy = y k, dc/dz = -1/R^3
    k = z / (R ** 3 * rho2) - 2.0 * (1.0 - z / R) / rho2 ** 2
    cz = -1.0 / R ** 3
    vals = dict(
        f0=c * y, fx=y * x * k, fy=c + y * y * k, fz=y * cz,
        g0=c * x, gx=c + x * x * k, gy=x * y * k, gz=x * cz,
    )
    return LinearCoefficients(**{key: float(v) for key, v in vals.items()})


def curl_check(fld: FieldModel, r, h: float = 1e-4) -> np.ndarray:
    """Central-difference curl of A at ``r`` (shape ``(..., 3)``)."""
    r = np.asarray(r, dtype=float)
    eye = np.eye(3) * h
    # dA[..., i, j] = dA_j / dx_i
    dA = np.stack([
        (evaluate_potential(fld, r + eye[i]) - evaluate_potential(fld, r - eye[i])) / (2 * h)
        for i in range(3)
    ], axis=-2)
    return np.stack([
        dA[..., 1, 2] - dA[..., 2, 1],
        dA[..., 2, 0] - dA[..., 0, 2],
        dA[..., 0, 1] - dA[..., 1, 0],
    ], axis=-1)
