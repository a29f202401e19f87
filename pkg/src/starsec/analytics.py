"""Semi-analytical secrecy metrics: Eve SNR laws, equivalent-Eve mappings,
SOP and ASC (adaptive integration and Gauss-Laguerre / Chebyshev-Gauss
closed forms), diversity order, weak-user error floor and high-SNR ASC.

Integrals over [0, inf) are done in s = ln x between quantiles of the
equivalent-Eve law, with analytic tail corrections at the upper end.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.optimize import brentq

from .fading import CascadedStats, fit_user_gamma
from .geometry import ConfigError, NetworkConfig, ordered_user_ccdfs, ordered_user_cdfs
from .mathkernel import ConvergenceError, adaptive_integrate, chebyshev_gauss, gauss_laguerre

LN2 = math.log(2.0)
ABS_TOL = 1e-11
# log(-log F) targets bracketing the equivalent-Eve law in the log domain
_LOG_RATE_LOW = math.log(700.0)       # F ~ e^-700
_LOG_RATE_HIGH = math.log(1e-16)      # 1 - F ~ 1e-16
_S_BRACKET = (-700.0, 700.0)


class Protocol(str, Enum):
    TS = "TS"
    ES = "ES"


class Method(str, Enum):
    ADAPTIVE_INTEGRAL = "analytic"
    QUADRATURE = "quadrature"
    MONTE_CARLO = "monte-carlo"


@dataclass(frozen=True)
class Quadrature:
    """Closed-form rule orders: Gauss-Laguerre for the strong user, Chebyshev-Gauss for the weak one."""

    M_s: int = 30
    M_w: int = 30


@dataclass(frozen=True)
class ProtocolMode:
    kind: Protocol
    param_s: float

    def __post_init__(self):
        object.__setattr__(self, "kind", Protocol(self.kind))
        if not 0.0 <= self.param_s <= 1.0:
            raise ConfigError(f"mode parameter must lie in [0, 1] (got {self.param_s})")

    @property
    def param_w(self) -> float:
        return 1.0 - self.param_s

    def param(self, eps: str) -> float:
        return self.param_s if eps == "s" else self.param_w

    def coeff(self, eps: str) -> float:
        """SNR scaling of side eps: 1 under time switching, beta under energy splitting."""
        return 1.0 if self.kind is Protocol.TS else self.param(eps)

    def ratio(self, eps: str, tau: str) -> float:
        """param_eps / param_tau; inf when side tau is switched off."""
        pt = self.param(tau)
        return math.inf if pt == 0 else self.param(eps) / pt

    @property
    def degenerate(self) -> bool:
        return self.param_s in (0.0, 1.0)

    def disabled(self, eps: str) -> bool:
        return self.param(eps) == 0.0


@dataclass(frozen=True)
class EveLaw:
    m_s: float
    m_w: float
    delta: float

    def m(self, eps: str) -> float:
        return self.m_s if eps == "s" else self.m_w


def eve_law(cfg: NetworkConfig, stats: CascadedStats) -> EveLaw:
    """Frechet scales of the strongest-Eve SNR on one half plane."""
    d = cfg.delta
    def m(a):
        return 0.5 * math.pi * d * cfg.lambda_e * (cfg.rho_e * a * cfg.A_L * stats.W_e) ** d * math.gamma(d)
    return EveLaw(m(cfg.a_s), m(cfg.a_w), d)


@dataclass(frozen=True)
class SecrecyResult:
    sop_strong: float | None = None
    sop_weak: float | None = None
    asc_strong: float | None = None
    asc_weak: float | None = None
    method: Method = Method.ADAPTIVE_INTEGRAL
    ci_halfwidth: dict | None = None
    flags: tuple = field(default_factory=tuple)
    sop_pair_value: float | None = None   # joint estimate when available (Monte Carlo)

    @property
    def asc_pair(self) -> float | None:
        if self.asc_strong is None or self.asc_weak is None:
            return None
        return self.asc_strong + self.asc_weak

    @property
    def sop_pair(self) -> float | None:
        """P(either user in outage); independence product unless a joint estimate exists."""
        if self.sop_pair_value is not None:
            return self.sop_pair_value
        if self.sop_strong is None or self.sop_weak is None:
            return None
        return 1.0 - (1.0 - self.sop_strong) * (1.0 - self.sop_weak)


def eve_snr_cdf_side(x, law: EveLaw, eps: str, tau_side_coeff: float = 1.0):
    """exp(-m_eps (x / c_tau)^-delta); zero for x <= 0."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = np.exp(-law.m(eps) * (x[pos] / tau_side_coeff) ** (-law.delta))
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------- equivalent Eve

def _log_expm1(u):
    """log(e^u - 1) without overflow for large u."""
    u = np.asarray(u, dtype=float)
    big = u > 30.0
    ub = np.where(big, u, 31.0)
    us = np.where(big, 1.0, u)
    with np.errstate(divide="ignore"):
        return np.where(big, ub + np.log1p(-np.exp(-ub)), np.log(np.expm1(us)))


def _side_terms(s, law, eps, mode):
    """Per-side (log ratio, log of the mapped argument) for the equivalent-Eve law at x = e^s."""
    out = []
    for tau in ("s", "w"):
        r = mode.ratio(eps, tau)
        if not np.isfinite(r) or r == 0:
            continue        # Eve side switched off (contributes nothing) or own side off
        if mode.kind is Protocol.TS:
            lg = _log_expm1(r * np.logaddexp(0.0, s))
        else:
            lg = math.log(r) + s
        out.append((r, lg))
    return out


def _log_rate(s, law, eps, mode):
    """log(-log F_E(e^s)); -inf when there is no eavesdropping."""
    s = np.asarray(s, dtype=float)
    m = law.m(eps)
    terms = _side_terms(s, law, eps, mode)
    if m == 0 or not terms:
        return np.full_like(s, -np.inf)
    acc = np.full_like(s, -np.inf)
    for _, lg in terms:
        acc = np.logaddexp(acc, -law.delta * lg)
    return math.log(m) + acc


def _log_pdf_times_x(s, law, eps, mode):
    """log(x f_E(x)) at x = e^s."""
    s = np.asarray(s, dtype=float)
    m, d = law.m(eps), law.delta
    acc = np.full_like(s, -np.inf)
    for r, lg in _side_terms(s, law, eps, mode):
        if mode.kind is Protocol.TS:
            # r (x+1)^(r-1) ((x+1)^r - 1)^(-d-1) * x
            part = math.log(r) + (r - 1.0) * np.logaddexp(0.0, s) - (d + 1.0) * lg + s
        else:
            part = -d * math.log(r) - d * s
        acc = np.logaddexp(acc, part)
    return math.log(m * d) + acc - np.exp(_log_rate(s, law, eps, mode))


def _eve_mode_check(mode: ProtocolMode, kind: Protocol, eps: str):
    if mode.kind is not kind:
        raise ConfigError(f"expected a {kind.value} mode, got {mode.kind.value}")
    if mode.degenerate:
        raise ConfigError(f"equivalent-Eve law undefined for degenerate mode parameter {mode.param_s}")


def equiv_eve_cdf(x, law: EveLaw, eps: str, mode: ProtocolMode):
    """CDF of the equivalent SNR of the most harmful Eve for user eps's message."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = np.exp(-np.exp(_log_rate(np.log(x[pos]), law, eps, mode)))
    return float(out) if out.ndim == 0 else out


def equiv_eve_ccdf(x, law: EveLaw, eps: str, mode: ProtocolMode):
    x = np.asarray(x, dtype=float)
    out = np.ones_like(x)
    pos = x > 0
    out[pos] = -np.expm1(-np.exp(_log_rate(np.log(x[pos]), law, eps, mode)))
    return float(out) if out.ndim == 0 else out


def _equiv_pdf(x, law, eps, mode):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    if law.m(eps) > 0:
        s = np.log(x[pos])
        out[pos] = np.exp(_log_pdf_times_x(s, law, eps, mode) - s)
    return float(out) if out.ndim == 0 else out


def equiv_eve_pdf_ts(x, law: EveLaw, eps: str, mode: ProtocolMode):
    """PDF of the equivalent Eve SNR under time switching (time-ratio mapping)."""
    _eve_mode_check(mode, Protocol.TS, eps)
    return _equiv_pdf(x, law, eps, mode)


def equiv_eve_pdf_es(x, law: EveLaw, eps: str, mode: ProtocolMode):
    """PDF of the equivalent Eve SNR under energy splitting (energy-ratio mapping)."""
    _eve_mode_check(mode, Protocol.ES, eps)
    return _equiv_pdf(x, law, eps, mode)


def _eve_log_bounds(law, eps, mode):
    """(s_lo, s_hi) with F_E(e^s_lo) ~ e^-700 and 1 - F_E(e^s_hi) ~ 1e-16."""
    def solve(target):
        g = lambda s: float(_log_rate(s, law, eps, mode)) - target
        a, b = _S_BRACKET
        if g(a) < 0:
            return a
        if g(b) > 0:
            return b
        return brentq(g, a, b, xtol=1e-10)
    return solve(_LOG_RATE_LOW), solve(_LOG_RATE_HIGH)


# ---------------------------------------------------------------- thresholds

def _rate_factor(mode, eps, R):
    """2^(R / T_eps) under TS, 2^R under ES (log-domain guarded)."""
    expo = R / mode.param(eps) if mode.kind is Protocol.TS else R
    return math.inf if expo * LN2 > 700 else 2.0**expo


def b_up(mode: ProtocolMode, cfg: NetworkConfig) -> float:
    """Largest equivalent Eve SNR at which the weak user can still be secure."""
    q = _rate_factor(mode, "w", cfg.R_w)
    if mode.kind is Protocol.TS:
        return 1.0 / (q * cfg.a_s) - 1.0
    return 1.0 / (q * cfg.a_s * mode.param_w) - 1.0 / mode.param_w


def strong_threshold(x, mode: ProtocolMode, cfg: NetworkConfig):
    """Channel power below which the strong user is in secrecy outage, given Eve SNR x."""
    x = np.asarray(x, dtype=float)
    q = _rate_factor(mode, "s", cfg.R_s)
    with np.errstate(over="ignore"):
        if mode.kind is Protocol.TS:
            return (q * (x + 1.0) - 1.0) / (cfg.a_s * cfg.rho_b)
        b = mode.param_s
        return (q * (b * x + 1.0) - 1.0) / (b * cfg.a_s * cfg.rho_b)


def _weak_map(mode, cfg):
    """x(z) and dx/dz, where z = g / (a_w - a_s g) is the weak user's SNR-domain threshold."""
    q = _rate_factor(mode, "w", cfg.R_w)
    scale = 1.0 if mode.kind is Protocol.TS else mode.param_w

    def x_of(z):
        g = cfg.a_w * z / (1.0 + cfg.a_s * z)
        return ((g + 1.0) / q - 1.0) / scale

    def dx_dz(z):
        return cfg.a_w / ((1.0 + cfg.a_s * z) ** 2 * q * scale)

    h_div = cfg.rho_b * scale     # H threshold = z / h_div
    return x_of, dx_dz, h_div


def _z_of_x(x, mode, cfg):
    q = _rate_factor(mode, "w", cfg.R_w)
    scale = 1.0 if mode.kind is Protocol.TS else mode.param_w
    g = q * (scale * x + 1.0) - 1.0
    return g / (cfg.a_w - cfg.a_s * g)


def _user_scale(stats, cfg):
    # channel power where the unordered CDF argument y equals one
    return cfg.A_L * stats.theta_r / cfg.R_U**cfg.alpha


# ---------------------------------------------------------------- SOP

def _check(res, what):
    if not res.converged:
        raise ConvergenceError(f"{what}: adaptive integration did not converge (error {res.error:.3g})")
    return res.value


def _sop_strong_adaptive(mode, cfg, stats, law):
    if law.m_s == 0:
        return ordered_user_cdfs(float(strong_threshold(0.0, mode, cfg)), stats, cfg)[0]
    s_lo, s_hi = _eve_log_bounds(law, "s", mode)

    def f(s):
        fs, _ = ordered_user_cdfs(strong_threshold(np.exp(s), mode, cfg), stats, cfg)
        return fs * np.exp(_log_pdf_times_x(s, law, "s", mode))

    val = _check(adaptive_integrate(f, s_lo, s_hi, abs_tol=ABS_TOL), "sop strong")
    x_hi = math.exp(s_hi)
    tail = equiv_eve_ccdf(x_hi, law, "s", mode) * ordered_user_cdfs(float(strong_threshold(x_hi, mode, cfg)), stats, cfg)[0]
    return val + tail


def _sop_weak_adaptive(mode, cfg, stats, law):
    B = b_up(mode, cfg)
    x_of, dx_dz, h_div = _weak_map(mode, cfg)
    z0 = float(_z_of_x(0.0, mode, cfg))
    if law.m_w == 0:
        return ordered_user_cdfs(z0 / h_div, stats, cfg)[1]
    s_lo, _ = _eve_log_bounds(law, "w", mode)
    x_lo = math.exp(s_lo)
    if x_lo >= B:
        return equiv_eve_ccdf(B, law, "w", mode)
    z_lo = max(z0, float(_z_of_x(x_lo, mode, cfg)))
    # past z_hi the weak user is essentially always in outage; remaining Eve mass is added exactly
    z_hi = max(z_lo * 10.0, h_div * _user_scale(stats, cfg) * 1e12)

    def f(t):
        z = np.exp(t)
        x = x_of(z)
        _, fw = ordered_user_cdfs(z / h_div, stats, cfg)
        return fw * _equiv_pdf(x, law, "w", mode) * dx_dz(z) * z

    val = _check(adaptive_integrate(f, math.log(z_lo), math.log(z_hi), abs_tol=ABS_TOL), "sop weak")
    x_top = x_of(z_hi)
    mass_top = equiv_eve_cdf(B, law, "w", mode) - equiv_eve_cdf(x_top, law, "w", mode)
    return val + mass_top + equiv_eve_ccdf(B, law, "w", mode)


def _sop_strong_quadrature(mode, cfg, stats, law, M):
    rule = gauss_laguerre(M)
    x = rule.nodes
    fs, _ = ordered_user_cdfs(strong_threshold(x, mode, cfg), stats, cfg)
    return float(np.sum(rule.scaled_weights * _equiv_pdf(x, law, "s", mode) * fs))


def _sop_weak_quadrature(mode, cfg, stats, law, M):
    B = b_up(mode, cfg)
    rule = chebyshev_gauss(M)
    x = 0.5 * B * (rule.nodes + 1.0)
    z = _z_of_x(x, mode, cfg)
    _, fw = ordered_user_cdfs(z / _weak_map(mode, cfg)[2], stats, cfg)
    val = 0.5 * B * np.sum(rule.weights * _equiv_pdf(x, law, "w", mode) * fw)
    return float(val) + equiv_eve_ccdf(B, law, "w", mode)


def _resolve(cfg, stats):
    return stats if stats is not None else fit_user_gamma(cfg.fading, cfg.N)


def sop(mode: ProtocolMode, cfg: NetworkConfig, stats: CascadedStats | None = None,
        method=Method.ADAPTIVE_INTEGRAL) -> SecrecyResult:
    """Secrecy outage probability of the strong and weak user.

    ``method`` is Method.ADAPTIVE_INTEGRAL or a Quadrature(M_s, M_w) instance.
    Disabled users (mode parameter 0 for their side) get SOP 1 and a flag;
    an infeasible weak-user target (B_up <= 0) gives SOP_w = 1 and a flag.
    """
    stats = _resolve(cfg, stats)
    law = eve_law(cfg, stats)
    flags = []
    quad = isinstance(method, Quadrature)
    out = {}
    if mode.disabled("s"):
        out["s"] = 1.0
        flags.append("strong_disabled")
    else:
        out["s"] = (_sop_strong_quadrature(mode, cfg, stats, law, method.M_s) if quad
                    else _sop_strong_adaptive(mode, cfg, stats, law))
    if mode.disabled("w"):
        out["w"] = 1.0
        flags.append("weak_disabled")
    elif not b_up(mode, cfg) > 0:
        out["w"] = 1.0
        flags.append("weak_threshold_infeasible")
    else:
        out["w"] = (_sop_weak_quadrature(mode, cfg, stats, law, method.M_w) if quad
                    else _sop_weak_adaptive(mode, cfg, stats, law))
    clip = lambda v: min(max(float(v), 0.0), 1.0)
    return SecrecyResult(sop_strong=clip(out["s"]), sop_weak=clip(out["w"]),
                         method=Method.QUADRATURE if quad else Method.ADAPTIVE_INTEGRAL,
                         flags=tuple(flags))


# ---------------------------------------------------------------- ASC

def _asc_strong_adaptive(mode, cfg, stats, law):
    """(1/ln2) int_0^inf P(c a_s rho H_s > y) F_E(y / c) / (1 + y) dy, times T_s under TS."""
    c = mode.coeff("s")
    pre = mode.param_s if mode.kind is Protocol.TS else 1.0
    unit = c * cfg.a_s * cfg.rho_b        # user SNR per unit channel power
    if law.m_s == 0:
        s_lo = math.log(unit * _user_scale(stats, cfg)) - 60.0
    else:
        s_lo = _eve_log_bounds(law, "s", mode)[0] + math.log(c)
    s_hi = math.log(unit * _user_scale(stats, cfg)) + 55.0

    def h(s):
        y = np.exp(s)
        hs, _ = ordered_user_ccdfs(y / unit, stats, cfg)
        fe = 1.0 if law.m_s == 0 else equiv_eve_cdf(y / c, law, "s", mode)
        return hs * fe * y / (1.0 + y)

    val = _check(adaptive_integrate(h, s_lo, s_hi, abs_tol=ABS_TOL), "asc strong")
    # the user CCDF falls as y^-delta far out: integrand ~ e^{-delta s}
    tail = float(h(np.array([s_hi]))[0]) / cfg.delta
    return pre * (val + tail) / LN2


def _weak_user_ccdf_snr(y, mode, cfg, stats):
    """P(weak-user SINR > y) for y below its ceiling a_w / a_s."""
    c = mode.coeff("w")
    y = np.asarray(y, dtype=float)
    h = y / (c * cfg.rho_b * (cfg.a_w - cfg.a_s * y))
    return ordered_user_ccdfs(h, stats, cfg)[1]


def _asc_weak_adaptive(mode, cfg, stats, law):
    """(1/ln2) int_0^{a_w/a_s} P(SINR_w > y) F_E(y / c) / (1 + y) dy, times T_w under TS.

    Mapped to z = y / (a_w - a_s y) in (0, inf) so the steep cut-off at the
    SINR ceiling becomes a smooth tail.
    """
    c = mode.coeff("w")
    pre = mode.param_w if mode.kind is Protocol.TS else 1.0
    a_s, a_w = cfg.a_s, cfg.a_w
    unit = c * cfg.rho_b
    z_lo = 1e-300
    if law.m_w > 0:
        x_lo = math.exp(_eve_log_bounds(law, "w", mode)[0]) * c
        if x_lo >= a_w / a_s:
            return 0.0
        z_lo = x_lo / (a_w - a_s * x_lo)
    z_lo = max(z_lo, unit * _user_scale(stats, cfg) * 1e-40)
    z_hi = max(unit * _user_scale(stats, cfg) * 1e25, 10.0 * z_lo)

    def h(t):
        z = np.exp(t)
        y = a_w * z / (1.0 + a_s * z)
        dy = a_w / (1.0 + a_s * z) ** 2
        _, hw = ordered_user_ccdfs(z / unit, stats, cfg)
        fe = 1.0 if law.m_w == 0 else equiv_eve_cdf(y / c, law, "w", mode)
        return hw * fe * dy * z / (1.0 + y)

    val = _check(adaptive_integrate(h, math.log(z_lo), math.log(z_hi), abs_tol=ABS_TOL), "asc weak")
    return pre * val / LN2


def _asc_strong_quadrature(mode, cfg, stats, law, M):
    rule = gauss_laguerre(M)
    x = rule.nodes
    c = mode.coeff("s")
    pre = mode.param_s if mode.kind is Protocol.TS else 1.0
    hs, _ = ordered_user_ccdfs(x / (c * cfg.a_s * cfg.rho_b), stats, cfg)
    fe = equiv_eve_cdf(x / c, law, "s", mode) if law.m_s > 0 else 1.0
    return pre * float(np.sum(rule.scaled_weights * hs * fe / (1.0 + x))) / LN2


def _asc_weak_quadrature(mode, cfg, stats, law, M):
    rule = chebyshev_gauss(M)
    phi = rule.nodes
    a_s, a_w = cfg.a_s, cfg.a_w
    c = mode.coeff("w")
    pre = mode.param_w if mode.kind is Protocol.TS else 1.0
    y = a_w * (phi + 1.0) / (2.0 * a_s)
    w = math.pi * a_w * np.sqrt(1.0 - phi**2) / ((a_w * phi + a_s + 1.0) * M)
    fe = equiv_eve_cdf(y / c, law, "w", mode) if law.m_w > 0 else 1.0
    return pre * float(np.sum(w * _weak_user_ccdf_snr(y, mode, cfg, stats) * fe)) / LN2


def asc(mode: ProtocolMode, cfg: NetworkConfig, stats: CascadedStats | None = None,
        method=Method.ADAPTIVE_INTEGRAL) -> SecrecyResult:
    """Average secrecy capacity per user and for the pair (bits per channel use)."""
    stats = _resolve(cfg, stats)
    law = eve_law(cfg, stats)
    quad = isinstance(method, Quadrature)
    flags = []
    if mode.disabled("s"):
        cs = 0.0
        flags.append("strong_disabled")
    else:
        cs = (_asc_strong_quadrature(mode, cfg, stats, law, method.M_s) if quad
              else _asc_strong_adaptive(mode, cfg, stats, law))
    if mode.disabled("w"):
        cw = 0.0
        flags.append("weak_disabled")
    else:
        cw = (_asc_weak_quadrature(mode, cfg, stats, law, method.M_w) if quad
              else _asc_weak_adaptive(mode, cfg, stats, law))
    return SecrecyResult(asc_strong=max(cs, 0.0), asc_weak=max(cw, 0.0),
                         method=Method.QUADRATURE if quad else Method.ADAPTIVE_INTEGRAL,
                         flags=tuple(flags))


def evaluate(mode, cfg, stats=None, method=Method.ADAPTIVE_INTEGRAL) -> SecrecyResult:
    """SOP and ASC together."""
    stats = _resolve(cfg, stats)
    a = sop(mode, cfg, stats, method)
    b = asc(mode, cfg, stats, method)
    return SecrecyResult(a.sop_strong, a.sop_weak, b.asc_strong, b.asc_weak, a.method,
                         flags=tuple(dict.fromkeys(a.flags + b.flags)))


# ---------------------------------------------------------------- asymptotics

def secrecy_diversity_order(mode: ProtocolMode, cfg: NetworkConfig) -> float:
    """High-SNR decay exponent of the strong user's SOP.

    The SOP decays like the equivalent-Eve tail, whose slowest side term has
    exponent delta * min_tau(param_s / param_tau). Under ES the mapping is
    linear, so the order is delta. Under TS it is delta * min(1, T_s / T_w).
    """
    if mode.kind is Protocol.ES:
        return cfg.delta
    if mode.param_w == 0:
        return cfg.delta
    return cfg.delta * min(1.0, mode.param_s / mode.param_w)


def secrecy_diversity_order_weak_over_strong(mode: ProtocolMode, cfg: NetworkConfig) -> float:
    """delta * min(1, T_w / T_s): the alternative ratio convention for TS, kept for comparison."""
    if mode.kind is Protocol.ES or mode.param_s == 0:
        return cfg.delta
    return cfg.delta * min(1.0, mode.param_w / mode.param_s)


def weak_error_floor(mode: ProtocolMode, cfg: NetworkConfig, law: EveLaw | None = None) -> float:
    """Weak-user SOP limit as rho_b -> inf: P(equivalent Eve SNR > B_up)."""
    if law is None:
        law = eve_law(cfg, fit_user_gamma(cfg.fading, cfg.N))
    B = b_up(mode, cfg)
    if not B > 0 or mode.disabled("w"):
        return 1.0
    if law.m_w == 0:
        return 0.0
    return float(equiv_eve_ccdf(B, law, "w", mode))


def mean_log2_strong_gain(stats: CascadedStats, cfg: NetworkConfig) -> float:
    """E[log2 H_s] by integrating the CDF by parts around a scale point c:

    E[ln H] = ln c + int_c^inf (1 - F)/x dx - int_0^c F/x dx.
    """
    c = _user_scale(stats, cfg) * stats.k_r
    lc = math.log(c)

    def upper(s):
        return ordered_user_ccdfs(np.exp(s), stats, cfg)[0]

    def lower(s):
        return ordered_user_cdfs(np.exp(s), stats, cfg)[0]

    span = 60.0 / cfg.delta
    up = _check(adaptive_integrate(upper, lc, lc + span, abs_tol=ABS_TOL), "mean log gain")
    up += float(upper(np.array([lc + span]))[0]) / cfg.delta
    lo = _check(adaptive_integrate(lower, lc - 60.0, lc, abs_tol=ABS_TOL), "mean log gain")
    return (lc + up - lo) / LN2


def eve_capacity_loss(mode: ProtocolMode, cfg: NetworkConfig, eps: str, stats=None,
                      method=Method.ADAPTIVE_INTEGRAL) -> float:
    """(1/ln2) int F_E-bar(y / c) / (1 + y) dy over [0, inf) (strong) or [0, a_w/a_s] (weak), unscaled by T."""
    stats = _resolve(cfg, stats)
    law = eve_law(cfg, stats)
    if law.m(eps) == 0:
        return 0.0
    c = mode.coeff(eps)
    if isinstance(method, Quadrature):
        if eps == "s":
            rule = gauss_laguerre(method.M_s)
            x = rule.nodes
            return float(np.sum(rule.scaled_weights * equiv_eve_ccdf(x / c, law, eps, mode) / (1.0 + x))) / LN2
        rule = chebyshev_gauss(method.M_w)
        phi = rule.nodes
        y = cfg.a_w * (phi + 1.0) / (2.0 * cfg.a_s)
        w = math.pi * cfg.a_w * np.sqrt(1.0 - phi**2) / ((cfg.a_w * phi + cfg.a_s + 1.0) * method.M_w)
        return float(np.sum(w * equiv_eve_ccdf(y / c, law, eps, mode))) / LN2
    s_lo, s_hi = _eve_log_bounds(law, eps, mode)
    s_lo += math.log(c) - 5.0
    if eps == "w":
        s_hi = math.log(cfg.a_w / cfg.a_s)
    else:
        s_hi += math.log(c)

    def h(s):
        y = np.exp(s)
        return equiv_eve_ccdf(y / c, law, eps, mode) * y / (1.0 + y)

    val = _check(adaptive_integrate(h, s_lo, s_hi, abs_tol=ABS_TOL), "eve capacity loss")
    # below s_lo the Eve SNR CCDF is 1: int_0^y0 dy/(1+y)
    val += math.log1p(math.exp(s_lo))
    if eps == "s":
        val += float(h(np.array([s_hi]))[0]) / law.delta
    return val / LN2


@dataclass(frozen=True)
class AsymptoticASC:
    C_s_inf: float
    C_w_inf: float
    slope_s: float
    slope_w: float
    sigma_s: float

    def __iter__(self):
        return iter((self.C_s_inf, self.C_w_inf, self.slope_s, self.slope_w))


def asymptotic_asc(mode: ProtocolMode, cfg: NetworkConfig, stats: CascadedStats | None = None,
                   method=Method.ADAPTIVE_INTEGRAL) -> AsymptoticASC:
    """High-SNR ASC: capacity ceiling / log-growth minus the mean Eve capacity.

    Strong: pre * (log2(c_s a_s rho_b) + sigma_s) - pre * loss_s,
    weak: pre * log2(1 + a_w/a_s) - pre * loss_w, with pre = T_eps under TS
    and 1 under ES. Slopes (T_s, 0) for TS and (1, 0) for ES.
    """
    stats = _resolve(cfg, stats)
    sigma = mean_log2_strong_gain(stats, cfg)
    ts = mode.kind is Protocol.TS
    pre_s = mode.param_s if ts else 1.0
    pre_w = mode.param_w if ts else 1.0
    cs = 0.0
    if not mode.disabled("s"):
        loss_s = eve_capacity_loss(mode, cfg, "s", stats, method)
        cs = pre_s * (math.log2(mode.coeff("s") * cfg.a_s * cfg.rho_b) + sigma - loss_s)
    cw = 0.0
    if not mode.disabled("w"):
        loss_w = eve_capacity_loss(mode, cfg, "w", stats, method)
        cw = pre_w * (math.log2(1.0 + cfg.a_w / cfg.a_s) - loss_w)
    return AsymptoticASC(cs, cw, pre_s, 0.0, sigma)
