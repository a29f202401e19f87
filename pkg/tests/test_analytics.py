import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, optimize
from scipy import stats as sps

from starsec.analytics import (Protocol, ProtocolMode, Quadrature, SecrecyResult, asc, asymptotic_asc, b_up,
                               equiv_eve_ccdf, equiv_eve_cdf, equiv_eve_pdf_es, equiv_eve_pdf_ts, evaluate, eve_law,
                               eve_snr_cdf_side, secrecy_diversity_order, sop, weak_error_floor)
from starsec.geometry import ConfigError, NetworkConfig, ordered_user_cdfs
from starsec.mathkernel import adaptive_integrate

PDFS = {Protocol.TS: equiv_eve_pdf_ts, Protocol.ES: equiv_eve_pdf_es}


def db(v):
    return 10.0 ** (v / 10.0)


def reference_eve_cdf(x, law, eps, mode):
    """Equivalent-Eve CDF written out from the two side laws."""
    x = np.asarray(x, dtype=float)
    total = 0.0
    for tau in ("s", "w"):
        if mode.kind is Protocol.TS:
            with np.errstate(divide="ignore"):
                total = total + (np.power(x + 1.0, mode.param(eps) / mode.param(tau)) - 1.0) ** -law.delta
        else:
            total = total + (mode.param(eps) / mode.param(tau) * x) ** -law.delta
    return np.exp(-law.m(eps) * total)


def reference_eve_quantile(u, law, eps, mode):
    f = lambda s: float(reference_eve_cdf(math.exp(s), law, eps, mode)) - u
    return math.exp(optimize.brentq(f, -300.0, 300.0, xtol=1e-13, rtol=1e-15))


def slope(xs, ys):
    return np.polyfit(xs, ys, 1)[0]


# ---------------------------------------------------------------- Eve laws

def test_eve_scale_ratio(cfg, stats):
    law = eve_law(cfg, stats)
    assert law.m_s / law.m_w == pytest.approx((cfg.a_s / cfg.a_w) ** cfg.delta, rel=1e-12)


def test_side_cdf_examples(cfg, stats):
    law = eve_law(cfg, stats)
    assert eve_snr_cdf_side(1e300, law, "s") == pytest.approx(1.0)
    for c in (1.0, 0.3):
        assert eve_snr_cdf_side(c * law.m_w ** (1 / law.delta), law, "w", c) == pytest.approx(math.exp(-1), rel=1e-12)
    assert eve_snr_cdf_side(0.0, law, "s") == 0.0


@pytest.mark.parametrize("eps, c", [("s", 1.0), ("w", 1.0), ("s", 0.7), ("w", 0.3)])
def test_side_cdf_matches_simulated_field(cfg, stats, mc_default, eps, c):
    law = eve_law(cfg, stats)
    a = cfg.a_s if eps == "s" else cfg.a_w
    snr = c * a * cfg.rho_e * mc_default.Z[:, 0]
    ks = sps.kstest(snr, lambda x: eve_snr_cdf_side(x, law, eps, c)).statistic
    assert ks < 0.02


@pytest.mark.parametrize("kind", [Protocol.TS, Protocol.ES])
@pytest.mark.parametrize("eps", ["s", "w"])
def test_symmetric_mode_collapses_to_doubled_frechet(cfg, stats, kind, eps):
    law, mode = eve_law(cfg, stats), ProtocolMode(kind, 0.5)
    x = np.logspace(-3, 6, 40)
    m, d = law.m(eps), law.delta
    # at param 0.5 the ES ratio is 1, so both sides scale alike
    expected_pdf = 2 * m * d * x ** (-d - 1) * np.exp(-2 * m * x**-d)
    assert np.allclose(PDFS[kind](x, law, eps, mode), expected_pdf, rtol=1e-10, atol=0)
    assert np.allclose(equiv_eve_cdf(x, law, eps, mode), np.exp(-2 * m * x**-d), rtol=1e-10, atol=1e-300)


@pytest.mark.parametrize("kind, param", [(Protocol.TS, 0.7), (Protocol.TS, 0.2), (Protocol.ES, 0.7), (Protocol.ES, 0.1)])
@pytest.mark.parametrize("eps", ["s", "w"])
def test_equivalent_pdf_normalised_and_integrates_to_cdf(cfg, stats, kind, param, eps):
    law, mode = eve_law(cfg, stats), ProtocolMode(kind, param)
    pdf = PDFS[kind]
    dens = lambda s: pdf(np.exp(s), law, eps, mode) * np.exp(s)
    total = adaptive_integrate(dens, -200.0, 200.0, abs_tol=1e-12).value
    assert total == pytest.approx(1.0, abs=1e-6)
    for x in np.logspace(-2, 5, 20):
        cum = adaptive_integrate(dens, -200.0, math.log(x), abs_tol=1e-13).value
        assert cum == pytest.approx(float(reference_eve_cdf(x, law, eps, mode)), abs=1e-8)
    x = np.logspace(-3, 8, 30)
    assert np.allclose(equiv_eve_cdf(x, law, eps, mode), reference_eve_cdf(x, law, eps, mode), rtol=1e-10, atol=0)
    assert np.allclose(equiv_eve_cdf(x, law, eps, mode) + equiv_eve_ccdf(x, law, eps, mode), 1.0, atol=1e-14)


def test_pdf_rejects_wrong_or_degenerate_mode(cfg, stats):
    law = eve_law(cfg, stats)
    with pytest.raises(ConfigError):
        equiv_eve_pdf_ts(1.0, law, "s", ProtocolMode("ES", 0.5))
    with pytest.raises(ConfigError):
        equiv_eve_pdf_es(1.0, law, "s", ProtocolMode("ES", 1.0))
    with pytest.raises(ConfigError):
        equiv_eve_pdf_ts(1.0, law, "w", ProtocolMode("TS", 0.0))


def test_mode_validation():
    with pytest.raises(ConfigError):
        ProtocolMode("TS", 1.2)
    with pytest.raises(ValueError):
        ProtocolMode("XS", 0.5)
    m = ProtocolMode("ES", 0.3)
    assert m.param_w == pytest.approx(0.7) and m.coeff("s") == 0.3 and ProtocolMode("TS", 0.3).coeff("w") == 1.0


# ---------------------------------------------------------------- SOP

def _strong_secure_threshold(x, mode, cfg):
    """Channel power the strong user needs to beat an equivalent Eve SNR x."""
    if mode.kind is Protocol.TS:
        return (2 ** (cfg.R_s / mode.param_s) * (x + 1) - 1) / (cfg.a_s * cfg.rho_b)
    b = mode.param_s
    return (2**cfg.R_s * (b * x + 1) - 1) / (b * cfg.a_s * cfg.rho_b)


def _weak_secure_threshold(x, mode, cfg):
    if mode.kind is Protocol.TS:
        g, scale = 2 ** (cfg.R_w / mode.param_w) * (x + 1) - 1, 1.0
    else:
        scale = mode.param_w
        g = 2**cfg.R_w * (scale * x + 1) - 1
    return g / (cfg.rho_b * scale * (cfg.a_w - cfg.a_s * g))


def _inverse_transform_sop(mode, cfg, stats):
    """SOP as an expectation over the equivalent-Eve quantile, by scipy quadrature."""
    law = eve_law(cfg, stats)
    breaks = [0.0, 0.5, 0.9, 0.99, 1 - 1e-3, 1 - 1e-4, 1 - 1e-5, 1 - 1e-6, 1 - 1e-7, 1.0]

    def strong(u):
        x = reference_eve_quantile(u, law, "s", mode)
        return ordered_user_cdfs(_strong_secure_threshold(x, mode, cfg), stats, cfg)[0]

    ps = sum(integrate.quad(strong, a, b, epsabs=1e-13, epsrel=1e-10, limit=200)[0] for a, b in zip(breaks, breaks[1:]))
    u_top = float(reference_eve_cdf(b_up(mode, cfg), law, "w", mode))

    def weak(u):
        x = reference_eve_quantile(u, law, "w", mode)
        return ordered_user_cdfs(_weak_secure_threshold(x, mode, cfg), stats, cfg)[1]

    wb = [b for b in breaks if b < u_top] + [u_top]
    pw = sum(integrate.quad(weak, a, b, epsabs=1e-13, epsrel=1e-10, limit=200)[0] for a, b in zip(wb, wb[1:]))
    return ps, pw + 1.0 - u_top


@pytest.mark.parametrize("kind, param, rho_db", [("TS", 0.7, 80), ("TS", 0.4, 70), ("ES", 0.7, 80), ("ES", 0.3, 95)])
def test_sop_matches_inverse_transform_oracle(cfg, stats, kind, param, rho_db):
    c = cfg.with_(rho_b=db(rho_db))
    mode = ProtocolMode(kind, param)
    res = sop(mode, c, stats)
    ps, pw = _inverse_transform_sop(mode, c, stats)
    assert res.sop_strong == pytest.approx(ps, rel=1e-5, abs=1e-9)
    assert res.sop_weak == pytest.approx(pw, rel=1e-5, abs=1e-9)


@pytest.mark.parametrize("kind", ["TS", "ES"])
def test_sop_without_eves_is_plain_outage(cfg, stats, kind):
    c = cfg.with_(lambda_e=1e-20)
    mode = ProtocolMode(kind, 0.7)
    ref = ordered_user_cdfs(_strong_secure_threshold(0.0, mode, c), stats, c)[0]
    assert sop(mode, c, stats).sop_strong == pytest.approx(ref, abs=1e-6)
    assert weak_error_floor(mode, c) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("kind", ["TS", "ES"])
def test_sop_strong_nonincreasing_in_snr(cfg, stats, kind):
    vals = [sop(ProtocolMode(kind, 0.7), cfg.with_(rho_b=db(r)), stats).sop_strong for r in np.linspace(60, 130, 10)]
    assert np.all(np.diff(vals) <= 1e-15)


@pytest.mark.parametrize("kind", ["TS", "ES"])
def test_mode_parameter_trade_off(cfg, stats, kind):
    res = [sop(ProtocolMode(kind, t), cfg, stats) for t in np.arange(1, 10) / 10]
    assert np.all(np.diff([r.sop_strong for r in res]) <= 1e-15)
    assert np.all(np.diff([r.sop_weak for r in res]) >= -1e-15)


@pytest.mark.parametrize("kind", ["TS", "ES"])
def test_quadrature_close_to_adaptive_sop(cfg, stats, kind):
    mode = ProtocolMode(kind, 0.7)
    a, q = sop(mode, cfg, stats), sop(mode, cfg, stats, Quadrature(30, 30))
    assert abs(a.sop_strong - q.sop_strong) < 1e-3 and abs(a.sop_weak - q.sop_weak) < 1e-3


def test_degenerate_modes_flagged(cfg, stats):
    r = evaluate(ProtocolMode("TS", 1.0), cfg, stats)
    assert r.sop_weak == 1.0 and "weak_disabled" in r.flags and r.asc_weak == 0.0 and r.sop_pair == 1.0
    r = evaluate(ProtocolMode("ES", 0.0), cfg, stats)
    assert r.sop_strong == 1.0 and "strong_disabled" in r.flags
    r = sop(ProtocolMode("TS", 0.5), cfg.with_(R_w=5.0), stats)
    assert r.sop_weak == 1.0 and "weak_threshold_infeasible" in r.flags


def test_pair_conventions():
    r = SecrecyResult(0.1, 0.2, 1.5, 0.25)
    assert r.asc_pair == 1.75
    assert r.sop_pair == pytest.approx(1 - 0.9 * 0.8)
    assert SecrecyResult(0.1, 0.2, sop_pair_value=0.25).sop_pair == 0.25


# ---------------------------------------------------------------- error floor and diversity

def test_error_floor_two_ways_at_symmetric_ts(cfg, stats):
    law, mode = eve_law(cfg, stats), ProtocolMode("TS", 0.5)
    B = b_up(mode, cfg)
    direct = -math.expm1(-2 * law.m_w * B**-law.delta)
    assert weak_error_floor(mode, cfg, law) == pytest.approx(direct, rel=1e-10)


def test_error_floor_monotone_in_weak_rate(cfg):
    mode = ProtocolMode("TS", 0.7)
    rates = [0.4, 0.2, 0.1, 0.05, 1e-3, 1e-6]
    floors = [weak_error_floor(mode, cfg.with_(R_w=r)) for r in rates]
    assert np.all(np.diff(floors) < 0)
    assert b_up(mode, cfg.with_(R_w=1e-12)) == pytest.approx(cfg.a_w / cfg.a_s, rel=1e-9)


@pytest.mark.parametrize("kind", ["TS", "ES"])
def test_weak_sop_reaches_error_floor(cfg, stats, kind):
    mode = ProtocolMode(kind, 0.7)
    assert sop(mode, cfg.with_(rho_b=db(130)), stats).sop_weak == pytest.approx(weak_error_floor(mode, cfg), abs=5e-3)


def test_diversity_order_examples(cfg):
    assert secrecy_diversity_order(ProtocolMode("ES", 0.7), cfg) == pytest.approx(2 / 3)
    assert secrecy_diversity_order(ProtocolMode("TS", 0.5), cfg) == pytest.approx(cfg.delta)


# a small time share approaches its asymptote more slowly, so it is fitted further out
@pytest.mark.parametrize("kind, param, lo, hi", [("TS", 0.7, 90, 120), ("TS", 0.3, 90, 120), ("TS", 0.15, 180, 240),
                                                 ("ES", 0.7, 90, 120)])
def test_diversity_order_matches_sop_regression(cfg, stats, kind, param, lo, hi):
    mode = ProtocolMode(kind, param)
    rho = np.linspace(lo, hi, 7)
    logp = [math.log10(sop(mode, cfg.with_(rho_b=db(r)), stats).sop_strong) for r in rho]
    assert -slope(rho / 10, logp) == pytest.approx(secrecy_diversity_order(mode, cfg), rel=0.15)


# ---------------------------------------------------------------- ASC

def test_asc_weak_continuous_near_equal_power(cfg, stats):
    mode = ProtocolMode("ES", 0.5)
    vals = [asc(mode, cfg.with_(a_s=0.5 - e, a_w=0.5 + e), stats).asc_weak for e in (1e-2, 1e-3, 1e-4, 1e-5)]
    assert np.all(np.isfinite(vals))
    steps = np.abs(np.diff(vals))
    assert np.all(steps[1:] < steps[:-1])


def test_ts_strong_asc_is_linear_in_time_share_without_eves(cfg, stats):
    c = cfg.with_(lambda_e=0.0)
    a = asc(ProtocolMode("TS", 0.2), c, stats).asc_strong
    b = asc(ProtocolMode("TS", 0.4), c, stats).asc_strong
    assert b / a == pytest.approx(2.0, abs=1e-9)


def test_asc_pair_is_sum(cfg, stats):
    r = asc(ProtocolMode("ES", 0.6), cfg, stats)
    assert r.asc_pair == r.asc_strong + r.asc_weak and r.asc_strong >= 0 and r.asc_weak >= 0


@given(st.floats(0.05, 0.95), st.sampled_from(["TS", "ES"]))
def test_asc_bounded_by_eve_free_capacity(param, kind):
    cfg = NetworkConfig()
    mode = ProtocolMode(kind, param)
    with_eves = asc(mode, cfg)
    free = asc(mode, cfg.with_(lambda_e=0.0))
    assert with_eves.asc_strong <= free.asc_strong + 1e-9 and with_eves.asc_weak <= free.asc_weak + 1e-9


def test_weak_asc_ceiling_term(cfg, stats):
    mode = ProtocolMode("TS", 0.7)
    free = asymptotic_asc(mode, cfg.with_(lambda_e=0.0), stats)
    assert free.C_w_inf == pytest.approx(0.3 * math.log2(10 / 3), rel=1e-12)


@pytest.mark.parametrize("kind", ["TS", "ES"])
def test_asymptotic_asc_converges(cfg, stats, kind):
    mode = ProtocolMode(kind, 0.7)
    gaps = []
    for r in (90, 120):
        c = cfg.with_(rho_b=db(r))
        exact, approx = asc(mode, c, stats), asymptotic_asc(mode, c, stats)
        gaps.append(abs(exact.asc_strong - approx.C_s_inf) + abs(exact.asc_weak - approx.C_w_inf))
    assert gaps[1] < gaps[0] and gaps[1] < 0.1
    assert tuple(asymptotic_asc(mode, cfg, stats))[2:] == ((0.7, 0.0) if kind == "TS" else (1.0, 0.0))


def test_mean_log_gain_matches_sampling(cfg, stats, mc_default):
    sigma = asymptotic_asc(ProtocolMode("ES", 0.5), cfg, stats).sigma_s
    logs = np.log2(mc_default.H.max(axis=1))
    assert sigma == pytest.approx(logs.mean(), abs=4 * logs.std() / math.sqrt(len(logs)))
