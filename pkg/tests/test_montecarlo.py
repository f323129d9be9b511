import numpy as np
import pytest

from diracphase.montecarlo import (
    CHUNK_SIZE, ExperimentConfig, MomentEstimate, RunAbortedError, SweepPoint, config_for_N,
    estimate_moments, fit_sqrt_law, point_seed, run_experiment, sweep_variance,
)
from diracphase.paths import InvalidArgumentError
from diracphase.theory import noiseless_precession_phase

THETA0 = np.arccos(1 / np.sqrt(3))


def wiener(**kw):
    base = dict(field="uniform-asym", noise="wiener", drift="trivial", T=1.0, steps=50,
                samples=1000, seed=1, Bx=1.0, By=1.0)
    base.update(kw)
    return ExperimentConfig(**base)


def ou(eps=0.05, **kw):
    base = dict(field="monopole", noise="ou", drift="precession", T=5.0, steps=50,
                samples=500, seed=7, gamma=1.0, theta0=THETA0)
    base.update(kw)
    return ExperimentConfig.with_epsilon(eps, **base)


def test_config_rejects_bad_values():
    with pytest.raises(InvalidArgumentError):
        wiener(field="dipole")
    with pytest.raises(InvalidArgumentError):
        wiener(samples=0)
    with pytest.raises(InvalidArgumentError):
        wiener(seed=-1)
    with pytest.raises(InvalidArgumentError):
        ExperimentConfig(field="uniform-asym", noise="ou", drift="trivial", T=1.0, steps=5,
                         samples=5, seed=1)


def test_zero_noise_precession_gives_solid_angle():
    cfg = ExperimentConfig(field="monopole", noise="wiener", drift="precession", T=1.0,
                           steps=20_000, samples=3, seed=0, theta0=THETA0)
    ens = run_experiment(cfg)
    np.testing.assert_array_equal(ens.phases, ens.phases[0])
    assert abs(ens.phases[0] + noiseless_precession_phase(THETA0)) < 1e-3


def test_run_is_deterministic():
    a = run_experiment(wiener(samples=600, seed=5))
    b = run_experiment(wiener(samples=600, seed=5))
    c = run_experiment(wiener(samples=600, seed=6))
    np.testing.assert_array_equal(a.phases, b.phases)
    assert not np.array_equal(a.phases, c.phases)


def test_prefix_property():
    # trajectory i depends only on (seed, i), so a longer run extends a shorter one
    short = run_experiment(wiener(samples=300))
    long = run_experiment(wiener(samples=CHUNK_SIZE * 3 + 7))
    np.testing.assert_array_equal(long.phases[:300], short.phases)


def test_worker_count_invariance():
    cfg = ou(samples=CHUNK_SIZE * 2 + 17, field="monopole-linear")
    a = run_experiment(cfg, workers=1)
    b = run_experiment(cfg, workers=3)
    assert a.phases.tobytes() == b.phases.tobytes()


def test_rejection_abort_and_tolerance():
    # parked within rho_min of the string, every trajectory is singular
    cfg = ExperimentConfig(field="monopole", noise="wiener", drift="trivial", T=1.0, steps=10,
                           samples=200, seed=3, Bx=1e-10, By=1e-10, theta0=np.pi - 1e-7)
    with pytest.raises(RunAbortedError) as err:
        run_experiment(cfg)
    assert err.value.rejected == 200
    assert err.value.rate == 1.0
    ens = run_experiment(cfg, max_rejection_rate=1.0)
    assert ens.rejected == 200
    assert ens.accepted.size == 0
    assert np.all(np.isnan(ens.phases))


def test_estimate_moments_known_sample():
    est = estimate_moments(np.array([1.0, 2.0, 3.0, 4.0]), resamples=50, resample_seed=1)
    assert est.mean == 2.5
    assert est.variance == pytest.approx(5 / 3)
    assert est.samples == 4
    assert est.stderr_mean > 0


def test_estimate_moments_drops_nan():
    est = estimate_moments(np.array([1.0, np.nan, 3.0]), resamples=20)
    assert est.samples == 2 and est.mean == 2.0


def test_estimate_moments_needs_two_points():
    with pytest.raises(InvalidArgumentError):
        estimate_moments(np.array([1.0]))
    with pytest.raises(InvalidArgumentError):
        estimate_moments(np.array([1.0, 2.0]), resamples=1)


def test_bootstrap_is_seeded():
    x = np.random.default_rng(0).normal(size=500)
    assert estimate_moments(x, 100, 4) == estimate_moments(x, 100, 4)
    assert estimate_moments(x, 100, 4) != estimate_moments(x, 100, 5)


def test_stderr_mean_shrinks_as_inverse_sqrt():
    rng = np.random.default_rng(11)
    a = estimate_moments(rng.normal(size=2_000), 400, 0).stderr_mean
    b = estimate_moments(rng.normal(size=8_000), 400, 0).stderr_mean
    assert b / a == pytest.approx(0.5, rel=0.2)
    assert a == pytest.approx(1 / np.sqrt(2_000), rel=0.2)


def test_stderr_sigma_delta_method():
    m = MomentEstimate(0.0, 4.0, 0.1, 0.8, 100)
    assert m.sigma == 2.0
    assert m.stderr_sigma == pytest.approx(0.2)
    assert MomentEstimate(0.0, 0.0, 0.0, 0.0, 10).stderr_sigma == 0.0


# -- sweeps ----------------------------------------------------------------------

def test_config_for_N_keeps_dt_and_reseeds():
    base = ou()
    cfg = config_for_N(base, 20.0, 3)
    assert cfg.T == 20.0 and cfg.steps == 200
    assert cfg.grid().dt == pytest.approx(base.grid().dt)
    assert cfg.seed == point_seed(base.seed, 3) != base.seed
    w = config_for_N(wiener(T=2.0, steps=100), 4.0)
    assert w.T == 4.0 and w.steps == 200


def test_point_seeds_distinct():
    seeds = {point_seed(7, k) for k in range(100)}
    assert len(seeds) == 100
    assert point_seed(7, 0) == point_seed(7, 0)


def test_sweep_validates_N():
    with pytest.raises(InvalidArgumentError):
        sweep_variance(wiener(), [])
    with pytest.raises(InvalidArgumentError):
        sweep_variance(wiener(), [1.0, -2.0])
    with pytest.raises(InvalidArgumentError):
        sweep_variance(wiener(), [2.0, 1.0])


def test_wiener_sweep_is_linear_in_N():
    # sigma = sqrt(Bx By) T / 2 with T = N, so sigma grows linearly
    pts = sweep_variance(wiener(samples=20_000, steps=20, Bx=1.0, By=0.25), [1.0, 2.0, 4.0])
    for p in pts:
        assert abs(p.sigma - 0.25 * p.N) < 3 * p.sigma_stderr


def test_ou_variance_scales_as_eps4():
    pts = {}
    for eps in (0.05, 0.025):
        cfg = ou(eps, field="uniform-asym", drift="trivial", samples=20_000, seed=19)
        pts[eps] = estimate_moments(run_experiment(cfg)).variance
    # the same random streams make the ratio exact up to field curvature (none here)
    assert pts[0.05] / pts[0.025] == pytest.approx(16.0, rel=1e-9)


def test_monopole_ou_variance_scales_as_eps4():
    v = {eps: estimate_moments(run_experiment(ou(eps, drift="trivial", samples=2000))).variance
         for eps in (0.05, 0.025)}
    assert v[0.05] / v[0.025] == pytest.approx(16.0, rel=0.05)


def test_precession_sweep_turns_up_at_large_N():
    base = ou(samples=2000)
    pts = sweep_variance(base, [10.0, 100.0, 800.0])
    s = [p.sigma for p in pts]
    se = [p.sigma_stderr for p in pts]
    assert s[1] < s[0] - 3 * np.hypot(se[0], se[1])
    assert s[2] > s[1] + 3 * np.hypot(se[1], se[2])


# -- fit --------------------------------------------------------------------------

def test_fit_recovers_exact_law():
    N = np.array([5.0, 10.0, 20.0, 50.0])
    fit = fit_sqrt_law(list(zip(N, 0.3 * np.sqrt(N) + 0.1)))
    assert fit.a == pytest.approx(0.3, abs=1e-12)
    assert fit.b == pytest.approx(0.1, abs=1e-12)
    assert fit.residual_norm < 1e-12


def test_fit_accepts_sweep_points():
    pts = [SweepPoint(n, 2 * np.sqrt(n), 0.0) for n in (1.0, 4.0, 9.0)]
    fit = fit_sqrt_law(pts)
    assert fit.a == pytest.approx(2.0) and fit.b == pytest.approx(0.0, abs=1e-12)


def test_fit_errors():
    with pytest.raises(InvalidArgumentError):
        fit_sqrt_law([(1.0, 1.0), (2.0, 2.0)])
    with pytest.raises(InvalidArgumentError):
        fit_sqrt_law([(3.0, 1.0), (3.0, 2.0), (3.0, 1.5)])


def test_fit_is_stable_under_small_perturbation():
    N = np.array([5.0, 10.0, 20.0, 50.0, 100.0, 200.0])
    s = 0.0025 * np.sqrt(N) + 0.04
    noise = np.random.default_rng(2).normal(0, 1e-6, N.size)
    f0, f1 = fit_sqrt_law(list(zip(N, s))), fit_sqrt_law(list(zip(N, s + noise)))
    assert abs(f1.a - f0.a) < 1e-6 and abs(f1.b - f0.b) < 1e-5
    assert f1.a_stderr > 0
