import math
import random

import numpy as np
import pytest
from scipy.stats import multivariate_normal, norm

from babyworld.estimator import (
    THRESHOLD, KminPosterior, NoCrossingError, NotEnoughDataError,
    RunRecord, credible_interval, early_stopped_score, estimate_levels,
    fit_gp, format_report, kmin_posterior, log_marginal_likelihood,
    normal_time, read_results_csv, rl_confidence_interval,
    write_results_csv,
)


# --- normal time and early stopping -------------------------------------------

def _curve_crossing_at(t_cross, length=60):
    return [98.0 if t < t_cross - 1 else 99.6 for t in range(length)]


def test_normal_time_mean_of_crossings():
    curves = [_curve_crossing_at(10), _curve_crossing_at(20),
              _curve_crossing_at(30)]
    assert normal_time(curves) == 20.0


def test_normal_time_constant_100():
    assert normal_time([[100.0] * 5] * 3) == 1.0


def test_normal_time_error_when_never_crossing():
    with pytest.raises(ValueError, match="never"):
        normal_time([[50.0] * 10])


def test_normal_time_matches_brute_force_on_noisy_logistics():
    rng = random.Random(4)
    curves = []
    for _ in range(3):
        mid = rng.uniform(20, 40)
        curves.append([100.0 / (1 + math.exp(-(t - mid) / 3.0))
                       + rng.uniform(-0.2, 0.2) for t in range(120)])
    expected = []
    for curve in curves:
        for t, v in enumerate(curve, start=1):
            if v > 99.0:
                expected.append(t)
                break
    assert normal_time(curves) == sum(expected) / 3


def test_early_stop_monotone_curve_takes_last_window_index():
    curve = list(range(100))  # strictly increasing
    assert early_stopped_score(curve, 10) == curve[18]  # 1-based t < 20


def test_early_stop_takes_interior_peak():
    curve = [0, 5, 9, 4, 2, 1, 0, 0]
    assert early_stopped_score(curve, 3) == 9


def test_early_stop_matches_brute_force_prefix_max():
    rng = random.Random(9)
    curve = [rng.uniform(0, 100) for _ in range(50)]
    for t_norm in (1, 2.5, 7, 20):
        count = math.ceil(2 * t_norm) - 1
        assert early_stopped_score(curve, t_norm) == max(curve[:count])


def test_early_stop_empty_window_errors():
    with pytest.raises(ValueError):
        early_stopped_score([], 5)


# --- GP fitting ------------------------------------------------------------------

def _linear_records(kmin=4096.0, slope=1.2, noise=0.0, seed=0, lo=-2.0,
                    hi=2.5, step=0.25):
    rng = np.random.default_rng(seed)
    records = []
    x = lo
    while x <= hi:
        k = kmin * 2 ** x
        s = THRESHOLD + slope * x + (noise and rng.normal(0, noise))
        records.append(RunRecord(k=int(round(k)), s=float(s)))
        x += step
    return records


def test_fit_all_targets_at_threshold_drives_signal_to_floor():
    records = [RunRecord(k=2 ** i, s=99.0) for i in range(3, 12)]
    model = fit_gp(records)
    assert model.signal_scale == pytest.approx(0.1)  # lower bound
    mean, _ = model.posterior(np.linspace(2, 14, 40))
    assert np.allclose(mean, 99.0)


def test_fit_recovers_likelihood_of_known_draw():
    rng = np.random.default_rng(7)
    x = np.linspace(3, 9, 14)
    true = (1.5, 3.0, 0.3)
    d = x[:, None] - x[None, :]
    cov = true[1] ** 2 * np.exp(-0.5 * (d / true[0]) ** 2) \
        + true[2] ** 2 * np.eye(len(x))
    y = np.linalg.cholesky(cov) @ rng.standard_normal(len(x))
    records = [RunRecord(k=int(round(2 ** xi)), s=float(THRESHOLD + yi))
               for xi, yi in zip(x, y)]
    model = fit_gp(records)
    lml_true = log_marginal_likelihood(model.x, model.y, *true)
    assert model.lml >= lml_true - 1e-6


def test_fit_duplicate_x_conflicting_y_keeps_noise_positive():
    records = [RunRecord(k=1024, s=96.0), RunRecord(k=1024, s=99.8),
               RunRecord(k=4096, s=97.0), RunRecord(k=4096, s=99.9)]
    model = fit_gp(records)
    assert model.noise_scale > 0.1  # far from the 1e-3 floor


def test_fit_requires_three_surviving_records():
    records = [RunRecord(k=100, s=10.0), RunRecord(k=200, s=94.9),
               RunRecord(k=400, s=99.0), RunRecord(k=800, s=99.5)]
    with pytest.raises(NotEnoughDataError):
        fit_gp(records)


def test_low_scores_do_not_influence_the_fit():
    base = _linear_records(noise=0.05, seed=3)
    noisy = base + [RunRecord(k=7, s=12.0), RunRecord(k=11, s=94.99)]
    a = fit_gp(base)
    b = fit_gp(noisy)
    assert (a.length_scale, a.signal_scale, a.noise_scale) == \
        (b.length_scale, b.signal_scale, b.noise_scale)
    pa = kmin_posterior(a, (1024, 32768), grid_size=64, n_samples=20_000)
    pb = kmin_posterior(b, (1024, 32768), grid_size=64, n_samples=20_000)
    assert np.array_equal(pa.weights, pb.weights)


def test_posterior_mean_interpolates_within_two_noise_scales():
    records = _linear_records(noise=0.2, seed=12)
    model = fit_gp(records)
    mean, _ = model.posterior(model.x)
    assert np.all(np.abs(mean - (model.y + THRESHOLD))
                  <= 2 * model.noise_scale + 1e-9)


# --- the kmin posterior -----------------------------------------------------------

def test_posterior_mass_concentrates_when_mean_is_high():
    records = [RunRecord(k=2 ** i, s=99.9 + 0.001 * i) for i in range(4, 12)]
    model = fit_gp(records)
    post = kmin_posterior(model, (16, 2048), grid_size=32, n_samples=20_000)
    assert post.weights[0] > 0.99
    assert post.residual < 0.01


def test_posterior_residual_when_mean_stays_low():
    records = [RunRecord(k=2 ** i, s=96.0) for i in range(4, 12)]
    model = fit_gp(records)
    post = kmin_posterior(model, (16, 2048), grid_size=32, n_samples=20_000)
    assert post.residual > 0.95


def test_two_point_bucket_matches_bivariate_orthant_probability():
    # A fit whose left endpoint hugs the threshold, so both orthant
    # probabilities are interior values rather than saturated 0/1.
    records = _linear_records(noise=0.4, seed=21, lo=-0.2, hi=1.6, step=0.2)
    model = fit_gp(records)
    k_range = (records[0].k, records[-1].k)
    n = 100_000
    post = kmin_posterior(model, k_range, grid_size=2, n_samples=n)

    xq = np.array([math.log2(k_range[0]), math.log2(k_range[1])])
    mean, cov = model.posterior(xq)
    cov[np.diag_indices_from(cov)] += 1e-8
    p1 = 1.0 - norm.cdf(THRESHOLD, loc=mean[0], scale=math.sqrt(cov[0, 0]))
    both_below = multivariate_normal(mean=mean, cov=cov).cdf(
        [THRESHOLD, THRESHOLD])
    p2 = norm.cdf(THRESHOLD, loc=mean[0], scale=math.sqrt(cov[0, 0])) \
        - both_below
    assert 0.02 < p1 < 0.98 and 0.02 < p2 < 0.98
    for observed, exact in [(post.weights[0], p1), (post.weights[1], p2)]:
        se = math.sqrt(max(exact * (1 - exact), 1e-12) / n)
        assert abs(observed - exact) <= 3 * se + 1e-12


# --- credible intervals ---------------------------------------------------------------

def test_interval_degenerate_single_bucket():
    ks = np.exp2(np.linspace(5, 10, 16))
    weights = np.zeros(16)
    weights[4] = 0.7
    post = KminPosterior(ks=ks, weights=weights, residual=0.3)
    lo, hi = credible_interval(post)
    assert lo == hi == ks[4]


def test_interval_uniform_mass_takes_central_span():
    n = 200
    ks = np.exp2(np.linspace(3, 11, n))
    post = KminPosterior(ks=ks, weights=np.full(n, 1.0 / n), residual=0.0)
    lo, hi = credible_interval(post, level=0.99)
    i = int(np.searchsorted(ks, lo))
    j = int(np.searchsorted(ks, hi))
    assert j - i + 1 == math.ceil(0.99 * n)
    # Central: the two tails outside the window are balanced.
    assert abs(i - (n - 1 - j)) <= 1


def test_interval_errors_on_zero_mass():
    post = KminPosterior(ks=np.exp2(np.linspace(3, 5, 8)),
                         weights=np.zeros(8), residual=1.0)
    with pytest.raises(NoCrossingError):
        credible_interval(post)


def test_scale_equivariance_doubling_k():
    records = _linear_records(noise=0.1, seed=31)
    doubled = [RunRecord(k=r.k * 2, s=r.s) for r in records]
    m1, m2 = fit_gp(records), fit_gp(doubled)
    assert m1.length_scale == pytest.approx(m2.length_scale, rel=1e-9)
    p1 = kmin_posterior(m1, (records[0].k, records[-1].k),
                        grid_size=128, n_samples=20_000, seed=5)
    p2 = kmin_posterior(m2, (doubled[0].k, doubled[-1].k),
                        grid_size=128, n_samples=20_000, seed=5)
    lo1, hi1 = credible_interval(p1)
    lo2, hi2 = credible_interval(p2)
    assert lo2 == pytest.approx(2 * lo1, rel=1e-9)
    assert hi2 == pytest.approx(2 * hi1, rel=1e-9)


def test_monte_carlo_stability_under_sample_doubling():
    records = _linear_records(noise=0.15, seed=41)
    model = fit_gp(records)
    k_range = (records[0].k, records[-1].k)
    grid = 128
    a = kmin_posterior(model, k_range, grid_size=grid, n_samples=50_000)
    b = kmin_posterior(model, k_range, grid_size=grid, n_samples=100_000)
    for pa, pb in zip(credible_interval(a), credible_interval(b)):
        ia = int(np.searchsorted(a.ks, pa))
        ib = int(np.searchsorted(b.ks, pb))
        assert abs(ia - ib) <= 1


# --- RL confidence intervals ------------------------------------------------------------

def test_rl_interval_zero_width_for_equal_values():
    lo, hi = rl_confidence_interval([42.0] * 10)
    assert lo == hi == 42.0


def test_rl_interval_two_points_against_t_table():
    lo, hi = rl_confidence_interval([10.0, 20.0])
    # t(0.995, df=1) = 63.657 from a standard t table; sd = 7.0711.
    half = 63.657 * (7.0710678 / math.sqrt(2))
    assert (hi - lo) / 2 == pytest.approx(half, rel=1e-4)
    assert (lo + hi) / 2 == pytest.approx(15.0)


def test_rl_interval_requires_two_runs():
    with pytest.raises(ValueError):
        rl_confidence_interval([5.0])


def test_rl_interval_coverage_simulation():
    rng = np.random.default_rng(123)
    covered = 0
    trials = 300
    for _ in range(trials):
        sample = rng.normal(100.0, 15.0, size=10)
        lo, hi = rl_confidence_interval(sample)
        covered += lo <= 100.0 <= hi
    # 99% nominal; allow generous simulation slack.
    assert covered >= trials * 0.96


# --- CSV plumbing --------------------------------------------------------------------------

def test_results_csv_round_trip(tmp_path):
    path = tmp_path / "runs.csv"
    records = [RunRecord(1024, 97.5, "GoToRedBall", "r1"),
               RunRecord(2048, 99.2, "GoToRedBall", "r2"),
               RunRecord(4096, 99.6, "GoToLocal", "r1")]
    write_results_csv(path, records)
    by_level = read_results_csv(path)
    assert set(by_level) == {"GoToRedBall", "GoToLocal"}
    assert by_level["GoToRedBall"][0] == records[0]


def test_estimate_levels_produces_report(tmp_path):
    records = [RunRecord(r.k, r.s, "Synthetic", "r") for r in
               _linear_records(noise=0.1, seed=2)]
    estimates = estimate_levels({"Synthetic": records}, grid_size=64,
                                n_samples=20_000)
    assert len(estimates) == 1
    est = estimates[0]
    assert est.k_lo <= est.k_hi
    report = format_report(estimates)
    assert "Synthetic" in report and "k_lo" in report
