"""Burn-in screening, effective sample size, KS distances, run summaries."""

import math

import numpy as np
import pytest
from scipy import signal, stats

from multitry.diagnostics import (
    DegenerateSampleError,
    auto_burn_in,
    best_ks_over_burnins,
    iqr_outlier_filter,
    ks_distance,
    mcse_across_runs,
    mess,
    mixture_direct_sample,
)
from multitry.targets import MixtureParams


def ar1_chain(n, rho, seed, d=1):
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal((n, d))
    out = signal.lfilter([math.sqrt(1.0 - rho ** 2)], [1.0, -rho], noise, axis=0)
    out[0] = rng.standard_normal(d)
    return out if d > 1 else out[:, 0]


# ---------------------------------------------------------------------------
# burn-in


def test_burn_in_constant_chain_keeps_everything():
    result = auto_burn_in(np.full(400, 3.25))
    assert result.burn_in == 0
    assert result.retained.size == 400


def test_burn_in_cuts_contaminated_first_half():
    rng = np.random.default_rng(0)
    chain = np.concatenate([rng.normal(50.0, 1.0, 1000), rng.normal(0.0, 1.0, 1000)])
    result = auto_burn_in(chain)
    assert result.burn_in == 1000
    assert result.retained.size == 1000


def test_burn_in_iid_chain_rarely_cuts():
    zero_cuts = sum(
        auto_burn_in(np.random.default_rng(seed).standard_normal(2000)).burn_in == 0
        for seed in range(20)
    )
    assert zero_cuts >= 18


def test_burn_in_cut_is_a_block_multiple():
    for seed in range(5):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(100, 3000))
        drift = np.linspace(rng.uniform(0, 30), 0.0, n)
        chain = rng.standard_normal(n) + drift
        cut = auto_burn_in(chain).burn_in
        assert cut % (n // 20) == 0
        assert 0 <= cut <= 19 * (n // 20)


def test_burn_in_multivariate_takes_worst_coordinate():
    rng = np.random.default_rng(3)
    clean = rng.normal(0.0, 1.0, 2000)
    dirty = np.concatenate([rng.normal(40.0, 1.0, 500), rng.normal(0.0, 1.0, 1500)])
    cut_dirty = auto_burn_in(dirty).burn_in
    assert cut_dirty == 500
    both = auto_burn_in(np.column_stack([clean, dirty]))
    assert both.burn_in == max(auto_burn_in(clean).burn_in, cut_dirty)
    assert both.retained.shape == (2000 - both.burn_in, 2)


def test_burn_in_short_chain_kept_whole():
    result = auto_burn_in(np.arange(15.0))
    assert result.burn_in == 0 and result.retained.size == 15


def test_burn_in_walk_skips_an_isolated_bad_block_and_reincludes_it():
    # the backward walk tolerates one excluded block and keeps walking;
    # the final cut then re-includes the skipped block
    rng = np.random.default_rng(9)
    chain = rng.normal(0.0, 1.0, 2000)
    chain[1700:1800] += 1000.0
    result = auto_burn_in(chain)
    assert result.burn_in == 0
    assert result.retained.size == 2000


def test_burn_in_rejects_3d_input():
    with pytest.raises(ValueError):
        auto_burn_in(np.zeros((4, 4, 4)))


# ---------------------------------------------------------------------------
# effective sample size


def test_mess_is_near_n_for_iid_samples():
    x = np.random.default_rng(1).standard_normal((4000, 3))
    ratio = mess(x) / 4000
    assert 0.7 <= ratio <= 1.3


def test_mess_matches_ar1_theory_within_factor_two():
    n, rho = 20000, 0.9
    x = ar1_chain(n, rho, seed=2, d=2)
    expected = (1.0 - rho) / (1.0 + rho)  # about 0.0526
    ratio = mess(x) / n
    assert expected / 2.0 <= ratio <= expected * 2.0


def test_mess_duplicated_rows_halve_the_per_sample_efficiency():
    # repeating every row doubles N without adding information: the
    # absolute mESS stays put, so mESS/N halves
    x = np.random.default_rng(4).standard_normal((3000, 2))
    base = mess(x)
    doubled = mess(np.repeat(x, 2, axis=0))
    assert doubled == pytest.approx(base, rel=0.5)
    ratio_drop = (doubled / 6000) / (base / 3000)
    assert 0.5 / 1.5 <= ratio_drop <= 0.5 * 1.5


def test_mess_accepts_1d_chains():
    x = np.random.default_rng(5).standard_normal(2000)
    assert 0.7 <= mess(x) / 2000 <= 1.3


def test_mess_sample_size_requirements():
    with pytest.raises(DegenerateSampleError):
        mess(np.random.default_rng(0).standard_normal((99, 1)))
    with pytest.raises(DegenerateSampleError):
        mess(np.random.default_rng(0).standard_normal((100, 10)))


def test_mess_degenerate_samples_raise():
    with pytest.raises(DegenerateSampleError):
        mess(np.full((500, 1), 2.0))
    x = np.random.default_rng(6).standard_normal(500)
    with pytest.raises(DegenerateSampleError):
        mess(np.column_stack([x, 2.0 * x]))


# ---------------------------------------------------------------------------
# Kolmogorov-Smirnov distances


def test_ks_identical_samples_is_zero():
    x = np.random.default_rng(7).standard_normal(500)
    assert ks_distance(x, x.copy()) == 0.0


def test_ks_disjoint_samples_is_one():
    assert ks_distance(np.zeros(10), np.full(10, 100.0)) == 1.0


def test_ks_hand_value():
    # ECDFs interleave: F_a jumps at 0 and 2, F_b at 1 and 3
    assert ks_distance(np.array([0.0, 2.0]), np.array([1.0, 3.0])) == 0.5


def test_ks_matches_scipy_two_sample():
    rng = np.random.default_rng(8)
    for _ in range(20):
        a = rng.normal(size=int(rng.integers(20, 400)))
        b = rng.normal(loc=rng.uniform(-1, 1), size=int(rng.integers(20, 400)))
        ours = ks_distance(a, b)
        ref = stats.ks_2samp(a, b, method="asymp").statistic
        assert ours == pytest.approx(ref, abs=1e-12)


def test_ks_ties_match_scipy():
    a = np.array([1.0, 1.0, 2.0, 2.0, 3.0])
    b = np.array([1.0, 2.0, 2.0, 2.0, 4.0])
    assert ks_distance(a, b) == pytest.approx(
        stats.ks_2samp(a, b, method="asymp").statistic, abs=1e-12
    )


def test_ks_multivariate_is_max_over_coordinates():
    rng = np.random.default_rng(9)
    a = rng.normal(size=(300, 3))
    b = rng.normal(loc=[0.0, 1.0, 0.2], size=(400, 3))
    per_coord = [ks_distance(a[:, k], b[:, k]) for k in range(3)]
    assert ks_distance(a, b) == max(per_coord)


def test_ks_input_validation():
    with pytest.raises(ValueError):
        ks_distance(np.zeros((5, 2)), np.zeros((5, 3)))
    with pytest.raises(ValueError):
        ks_distance(np.zeros(0), np.zeros(5))


def test_best_ks_takes_minimum_over_cuts():
    rng = np.random.default_rng(10)
    base = rng.standard_normal(2000)
    chain = np.concatenate([rng.normal(8.0, 1.0, 1500), rng.standard_normal(500)])
    n = chain.size
    candidates = [ks_distance(chain[int(f * n):], base) for f in (0.25, 0.5, 0.75)]
    assert best_ks_over_burnins(chain, base) == min(candidates)
    # only the 75% cut leaves clean samples here
    assert min(candidates) == candidates[2] < 0.1


def test_best_ks_needs_four_samples():
    with pytest.raises(ValueError):
        best_ks_over_burnins(np.zeros(3), np.zeros(10))


# ---------------------------------------------------------------------------
# mixture baseline sampler


def test_mixture_direct_sample_shapes_and_determinism():
    params = MixtureParams(d=2)
    a = mixture_direct_sample(params, 500, seed=3)
    b = mixture_direct_sample(params, 500, seed=3)
    assert a.shape == (500, 2)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, mixture_direct_sample(params, 500, seed=4))


def test_mixture_direct_sample_component_frequencies():
    # well-separated means make nearest-mean labels exact, so the
    # frequencies must sit within 3 sigma multinomial bounds
    params = MixtureParams(
        d=2,
        means=[[-20.0, -20.0], [-20.0, 20.0], [0.0, 0.0], [20.0, -20.0], [20.0, 20.0]],
        weights=[1.0, 2.0, 4.0, 2.0, 1.0],
    )
    n = 20000
    draws = mixture_direct_sample(params, n, seed=5)
    dist = np.linalg.norm(draws[:, None, :] - params.means[None, :, :], axis=2)
    freqs = np.bincount(np.argmin(dist, axis=1), minlength=5) / n
    bound = 3.0 * np.sqrt(params.weights * (1 - params.weights) / n)
    assert np.all(np.abs(freqs - params.weights) <= bound)


def test_mixture_direct_sample_matches_target_moments():
    params = MixtureParams(d=2)
    draws = mixture_direct_sample(params, 40000, seed=6)
    expected_mean = params.weights @ params.means  # zero by symmetry
    np.testing.assert_allclose(expected_mean, 0.0, atol=1e-12)
    np.testing.assert_allclose(draws.mean(axis=0), expected_mean, atol=0.06)


# ---------------------------------------------------------------------------
# run summaries


def test_mcse_is_sample_sd_of_means():
    means = np.array([1.0, 2.0, 4.0, 5.0])
    assert mcse_across_runs(means) == pytest.approx(float(np.std(means, ddof=1)), rel=1e-15)


def test_mcse_needs_two_runs():
    with pytest.raises(ValueError):
        mcse_across_runs([1.0])
    with pytest.raises(ValueError):
        mcse_across_runs(np.zeros((3, 2)))


def test_iqr_filter_drops_the_far_point():
    values = np.concatenate([np.arange(10.0), [100.0]])
    kept, dropped = iqr_outlier_filter(values)
    np.testing.assert_array_equal(kept, np.arange(10.0))
    np.testing.assert_array_equal(dropped, [10])


def test_iqr_filter_drops_low_outliers_too():
    values = np.concatenate([[-100.0], np.arange(10.0)])
    kept, dropped = iqr_outlier_filter(values)
    np.testing.assert_array_equal(kept, np.arange(10.0))
    np.testing.assert_array_equal(dropped, [0])


def test_iqr_filter_keeps_identical_values():
    kept, dropped = iqr_outlier_filter(np.full(6, 7.0))
    assert kept.size == 6 and dropped.size == 0


def test_iqr_filter_fences_are_inclusive():
    # Q1 = 2, Q3 = 4, fences at [-1, 7]: the value 7 survives exactly
    values = np.array([2.0, 3.0, 4.0, 7.0, 2.0])
    kept, dropped = iqr_outlier_filter(values)
    assert 7.0 in kept
    assert dropped.size == 0


def test_iqr_filter_needs_four_values():
    with pytest.raises(ValueError):
        iqr_outlier_filter(np.array([1.0, 2.0, 3.0]))
