import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from diracphase.fields import (
    LinearizedMonopole, Monopole, SingularRegionError, UniformAsymmetric, UniformSymmetric,
    curl_check, evaluate_potential, linearize_monopole, monopole_field, potential,
)

THETA0 = np.arccos(1 / np.sqrt(3))


def _symbolic_coefficients(base):
    """Independent oracle: differentiate c(r) y and c(r) x with sympy."""
    x, y, z = sp.symbols("x y z", real=True)
    R = sp.sqrt(x ** 2 + y ** 2 + z ** 2)
    c = (1 - z / R) / (x ** 2 + y ** 2)
    at = dict(zip((x, y, z), (sp.Float(v, 30) for v in base)))
    out = {}
    for name, fn in (("f", c * y), ("g", c * x)):
        out[name + "0"] = float(fn.subs(at))
        for var in (x, y, z):
            out[name + str(var)] = float(sp.diff(fn, var).subs(at))
    return out


def test_uniform_asymmetric_value():
    np.testing.assert_array_equal(evaluate_potential(UniformAsymmetric(1.0), [2, 3, 0]), [-3, 0, 0])


def test_uniform_symmetric_value():
    np.testing.assert_allclose(evaluate_potential(UniformSymmetric(2.0), [2, 3, 5]), [-3, 2, 0])


def test_monopole_on_equator():
    np.testing.assert_allclose(evaluate_potential(Monopole(), [1, 0, 0]), [0, 1, 0])


def test_monopole_on_dirac_string():
    with pytest.raises(SingularRegionError) as err:
        evaluate_potential(Monopole(), [0, 0, -1])
    assert err.value.node_index == 0


def test_singular_error_carries_node_index():
    pts = np.array([[1.0, 0, 0], [0.5, 0.5, 0.1], [0.0, 0.0, 2.0], [0.0, 1e-9, -1.0]])
    with pytest.raises(SingularRegionError) as err:
        evaluate_potential(Monopole(), pts)
    assert err.value.node_index == 2


def test_potential_marks_singular_points_nan():
    A = potential(Monopole(), [[0.0, 0.0, 1.0], [1.0, 0.0, 0.0]])
    assert np.all(np.isnan(A[0, :2]))
    assert np.all(np.isfinite(A[1]))


def test_linearize_at_equator_point():
    k = linearize_monopole((1.0, 0.0, 0.0))
    assert k.f0 == 0.0
    assert k.g0 == pytest.approx(1.0)
    assert k.fy == pytest.approx(1.0)


@pytest.mark.parametrize("base", [
    (1.0, 0.0, 0.0),
    (np.sin(THETA0), 0.0, np.cos(THETA0)),
    (0.3, -0.8, 0.5),
    (-1.2, 0.4, -0.9),
    (0.05, 0.02, 1.5),
])
def test_linearize_matches_symbolic(base):
    k = linearize_monopole(base)
    ref = _symbolic_coefficients(base)
    for name, val in ref.items():
        assert getattr(k, name) == pytest.approx(val, rel=1e-12, abs=1e-12), name


def _fd_grad(fn, p, h=1e-6):
    p = np.asarray(p, float)
    return np.array([(fn(p + h * e) - fn(p - h * e)) / (2 * h) for e in np.eye(3)])


@settings(max_examples=40, deadline=None)
@given(st.floats(0.2, 2.0), st.floats(0.1, 2.9), st.floats(-np.pi, np.pi))
def test_linearize_matches_finite_differences(R, theta, phi):
    base = R * np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])
    k = linearize_monopole(base)
    f = lambda r: -potential(Monopole(), r)[0]
    g = lambda r: potential(Monopole(), r)[1]
    scale = max(1.0, np.abs(k.f_grad).max(), np.abs(k.g_grad).max())
    np.testing.assert_allclose(k.f_grad, _fd_grad(f, base), rtol=1e-6, atol=1e-6 * scale)
    np.testing.assert_allclose(k.g_grad, _fd_grad(g, base), rtol=1e-6, atol=1e-6 * scale)


def test_linearize_rejects_axis():
    with pytest.raises(SingularRegionError):
        linearize_monopole((0.0, 0.0, 1.0))


def test_linearized_potential_reproduces_expansion():
    base = (0.3, -0.8, 0.5)
    k = linearize_monopole(base)
    d = np.array([0.01, -0.02, 0.03])
    A = evaluate_potential(LinearizedMonopole(base, k), np.add(base, d))
    assert A[0] == pytest.approx(-(k.f0 + k.fx * d[0] + k.fy * d[1] + k.fz * d[2]))
    assert A[1] == pytest.approx(k.g0 + k.gx * d[0] + k.gy * d[1] + k.gz * d[2])
    assert A[2] == 0.0


# K values estimated from 2e4 random offsets per base, then frozen with ~10% headroom
@pytest.mark.parametrize("base, K", [
    ((np.sin(THETA0), 0.0, np.cos(THETA0)), 1.1),
    ((1.0, 0.0, 0.0), 2.0),
    ((0.3, -0.8, 0.5), 1.25),
])
def test_linearization_error_is_quadratic(base, K):
    rng = np.random.default_rng(2024)
    d = rng.normal(size=(5000, 3))
    d *= rng.uniform(0, 0.1, (5000, 1)) / np.linalg.norm(d, axis=1, keepdims=True)
    r = np.asarray(base) + d
    err = np.linalg.norm(potential(Monopole(), r) - potential(LinearizedMonopole.at(base), r), axis=1)
    assert np.all(err <= K * np.sum(d * d, axis=1))


@pytest.mark.parametrize("fld", [UniformAsymmetric(1.0), UniformSymmetric(1.0)])
def test_uniform_curl(fld):
    rng = np.random.default_rng(1)
    r = rng.uniform(-3, 3, (20, 3))
    np.testing.assert_allclose(curl_check(fld, r, 1e-4), np.tile([0, 0, 1.0], (20, 1)), atol=1e-6)


def test_gauge_pair_same_curl():
    r = np.random.default_rng(2).uniform(-2, 2, (50, 3))
    np.testing.assert_allclose(curl_check(UniformAsymmetric(2.5), r),
                               curl_check(UniformSymmetric(2.5), r), atol=1e-6)


def test_monopole_curl_single_point():
    np.testing.assert_allclose(curl_check(Monopole(), [1.0, 0, 0], 1e-4), [1.0, 0, 0], atol=1e-4)


def test_monopole_curl_grid():
    R = np.array([0.6, 1.0, 1.7])
    cos_t = np.linspace(-0.89, 0.95, 9)
    phi = np.linspace(0, 2 * np.pi, 7, endpoint=False)
    RR, CC, PP = np.meshgrid(R, cos_t, phi, indexing="ij")
    SS = np.sqrt(1 - CC ** 2)
    r = np.stack([RR * SS * np.cos(PP), RR * SS * np.sin(PP), RR * CC], -1).reshape(-1, 3)
    dev = np.abs(curl_check(Monopole(), r, 1e-4) - monopole_field(r))
    assert dev.max() < 1e-3


def test_linearized_curl_is_constant():
    base = (np.sin(THETA0), 0.0, np.cos(THETA0))
    L = LinearizedMonopole.at(base)
    k = L.coeffs
    r = np.asarray(base) + np.random.default_rng(3).normal(0, 0.3, (10, 3))
    np.testing.assert_allclose(curl_check(L, r), np.tile([-k.gz, -k.fz, k.fy + k.gx], (10, 1)),
                               atol=1e-8)
    # and equals the monopole field at the base
    np.testing.assert_allclose([-k.gz, -k.fz, k.fy + k.gx], monopole_field(base), atol=1e-12)


def test_curl_check_domain_violation():
    with pytest.raises(SingularRegionError):
        curl_check(Monopole(), [0.0, 0.0, -1.0], 1e-4)
