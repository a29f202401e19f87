import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats as sps

from starsec.fading import CascadedStats, DoubleNakagami, FadingParams, fit_user_gamma
from starsec.geometry import (ConfigError, NetworkConfig, asymptotic_unordered_log_cdf, exact_unordered_cdf,
                              order_statistics, ordered_user_ccdfs, ordered_user_cdfs, path_loss,
                              sample_disc_distances, sample_eve_field, sample_lu_pair, small_argument_law,
                              unordered_user_cdf, unordered_user_cdf_pair)
from starsec.mathkernel import DomainError


def _user_scale(stats, cfg):
    return cfg.A_L * stats.theta_r / cfg.R_U**cfg.alpha


def test_path_loss_examples():
    assert path_loss(1.0, NetworkConfig(l_BR=1.0)) == pytest.approx(1.0)
    assert path_loss(10.0, NetworkConfig(l_BR=10.0)) == pytest.approx(1e-6, rel=1e-12)
    cfg = NetworkConfig()
    assert path_loss(14.0, cfg) / path_loss(7.0, cfg) == pytest.approx(2.0**-cfg.alpha, rel=1e-12)


def test_path_loss_rejects_nonpositive_distance():
    with pytest.raises(DomainError):
        path_loss(0.0, NetworkConfig())


@pytest.mark.parametrize("bad, phrase", [(dict(a_s=0.3, a_w=0.6), "a_s + a_w = 1"),
                                         (dict(a_s=0.6, a_w=0.4), "a_s < a_w"),
                                         (dict(alpha=2.0), "alpha > 2")])
def test_config_invariants_named(bad, phrase):
    with pytest.raises(ConfigError, match=phrase.replace("+", r"\+")):
        NetworkConfig(**bad)


def test_disc_distances_uniform():
    R = 50.0
    d = sample_disc_distances(R, np.random.default_rng(1), 10**6)
    assert np.all((d > 0) & (d <= R))
    assert sps.kstest(d, lambda r: np.clip(r / R, 0, 1) ** 2).statistic < 0.005
    assert np.median(d) == pytest.approx(R / math.sqrt(2), rel=0.005)


def test_lu_pair_inside_disc():
    cfg, rng = NetworkConfig(), np.random.default_rng(2)
    pairs = np.array([sample_lu_pair(cfg, rng) for _ in range(2000)])
    assert pairs.shape == (2000, 2) and np.all((pairs > 0) & (pairs <= cfg.R_U))
    # reflecting and transmitting draws are independent
    assert abs(np.corrcoef(pairs.T)[0, 1]) < 0.1


def test_eve_field_poisson_count():
    cfg, rng = NetworkConfig(), np.random.default_rng(3)
    counts = np.array([len(sample_eve_field(cfg, rng)) for _ in range(10_000)])
    mean = cfg.lambda_e * math.pi * cfg.eve_trunc_radius**2
    assert counts.mean() == pytest.approx(mean, rel=0.02)
    assert counts.var() == pytest.approx(counts.mean(), rel=0.05)


def test_eve_field_empty_without_density():
    cfg, rng = NetworkConfig(lambda_e=0.0), np.random.default_rng(4)
    assert all(len(sample_eve_field(cfg, rng)) == 0 for _ in range(100))


def test_unordered_cdf_boundaries(cfg, stats):
    assert unordered_user_cdf(0.0, stats, cfg) == 0.0
    assert unordered_user_cdf(1e12 * _user_scale(stats, cfg), stats, cfg) == pytest.approx(1.0, abs=1e-6)


def test_unordered_cdf_matches_sampling(cfg, stats):
    rng = np.random.default_rng(5)
    n = 10**6
    power = rng.gamma(stats.k_r, stats.theta_r, n) * path_loss(sample_disc_distances(cfg.R_U, rng, n), cfg)
    for q in (0.15, 0.5, 0.85):
        x = np.quantile(power, q)
        F = unordered_user_cdf(x, stats, cfg)
        assert 0.1 < F < 0.9
        assert F == pytest.approx(np.mean(power <= x), abs=0.01)


@given(st.floats(-4.0, 8.0), st.floats(0.5, 200.0), st.floats(2.1, 5.0))
def test_closed_form_cdf_agrees_with_quadrature(log10_y, k_r, alpha):
    cfg = NetworkConfig(alpha=alpha)
    stats = CascadedStats(1.0, 1.0, 25, k_r, 1.0, 1.0)
    x = 10**log10_y * _user_scale(stats, cfg)
    F, Fc = unordered_user_cdf_pair(x, stats, cfg)
    assert F == pytest.approx(unordered_user_cdf(x, stats, cfg, abs_tol=1e-11), abs=1e-8)
    assert F + Fc == pytest.approx(1.0, abs=1e-12)


def test_unordered_cdf_monotone_on_grid(cfg, stats):
    x = np.logspace(-6, 6, 1000) * _user_scale(stats, cfg)
    F, _ = unordered_user_cdf_pair(x, stats, cfg)
    assert np.all((F >= 0) & (F <= 1)) and np.all(np.diff(F) >= 0)


def test_order_statistics_examples():
    assert order_statistics(0.0) == (0.0, 0.0)
    assert order_statistics(1.0) == (1.0, 1.0)
    assert order_statistics(0.5) == (0.25, 0.75)


def test_ordered_cdfs_identities(cfg, stats):
    x = np.logspace(-4, 4, 200) * _user_scale(stats, cfg)
    F, _ = unordered_user_cdf_pair(x, stats, cfg)
    Fs, Fw = ordered_user_cdfs(x, stats, cfg)
    assert np.all(Fs <= F + 1e-15) and np.all(F <= Fw + 1e-15)
    assert np.allclose(Fs + Fw, 2 * F, atol=1e-12, rtol=0)
    Cs, Cw = ordered_user_ccdfs(x, stats, cfg)
    assert np.allclose(Cs, 1 - Fs, atol=1e-12) and np.allclose(Cw, 1 - Fw, atol=1e-12)


def test_eve_truncation_insensitive(cfg, stats):
    # common random numbers: one 1000 m field, restricted to the default 500 m radius
    rng = np.random.default_rng(6)
    big = cfg.eve_trunc_radius * 2
    trials = 20_000
    counts = rng.poisson(cfg.lambda_e * math.pi * big**2, trials)
    d = sample_disc_distances(big, rng, counts.sum())
    gain = rng.exponential(stats.W_e, counts.sum()) * path_loss(d, cfg)
    owner = np.repeat(np.arange(trials), counts)
    full = np.zeros(trials)
    np.maximum.at(full, owner, gain)
    near = d <= cfg.eve_trunc_radius
    trunc = np.zeros(trials)
    np.maximum.at(trunc, owner[near], gain[near])
    q_full, q_trunc = np.quantile(full, 0.99), np.quantile(trunc, 0.99)
    assert abs(q_full - q_trunc) / q_full < 0.005


def test_small_argument_constants():
    cfg = NetworkConfig()
    distinct = small_argument_law(FadingParams(1e-12, 1.0, 1e-12, 2.0), 2, cfg)
    assert distinct.mu_hat == 1.0 and distinct.K_u == 1 and math.isfinite(distinct.L_u_exact)
    equal = small_argument_law(FadingParams(1e-12, 1.0, 1e-12, 1.0), 2, cfg)
    assert equal.K_u == 2 and math.isinf(equal.A_u)


def test_small_argument_law_is_power_law():
    cfg, p, N = NetworkConfig(), FadingParams(1e-12, 1.0, 1e-12, 2.0), 3
    logx = np.linspace(-30.0, -20.0, 11)
    logF = asymptotic_unordered_log_cdf(np.exp(logx), p, N, cfg)
    slope = np.diff(logF) / np.diff(logx)
    assert np.allclose(slope, small_argument_law(p, N, cfg).mu_hat * N, rtol=1e-12)


def test_small_argument_law_matches_exact_cdf():
    cfg, N = NetworkConfig(), 2
    model = DoubleNakagami(1.0, 2.0)
    p = FadingParams(1e-12, 1.0, 1e-12, 2.0)
    stats = fit_user_gamma(p, N)
    x = 10.0 ** -np.array([3.0, 4.0, 5.0]) * _user_scale(stats, cfg)
    ratio = exact_unordered_cdf(x, model, N, cfg) / np.exp(asymptotic_unordered_log_cdf(x, p, N, cfg))
    assert np.all((ratio > 0.8) & (ratio < 1.2))
    assert np.all(np.diff(np.abs(ratio - 1)) < 0)
