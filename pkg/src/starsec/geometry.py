"""Spatial model: STAR-RIS at the origin, BS at distance l_BR, legitimate
users uniform in a disc of radius R_U, eavesdroppers as a Poisson field.

Also holds the channel-power CDFs of a legitimate user (unordered, and the
strong/weak order statistics of the two-user pair) and their small-argument
asymptote.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .fading import CascadedStats, DoubleNakagami, FadingParams, table1_pdf
from .mathkernel import DomainError, adaptive_integrate, reg_gamma_pq


class ConfigError(ValueError):
    """A NetworkConfig / ProtocolMode invariant is violated."""


@dataclass(frozen=True)
class NetworkConfig:
    l_BR: float = 20.0            # m, BS to STAR-RIS
    R_U: float = 50.0             # m, user disc radius
    lambda_e: float = 1e-4        # Eve density per m^2
    alpha: float = 3.0            # path-loss exponent
    C_r: float = 1.0              # path-loss intercept
    rho_b: float = 1e8            # linear transmit SNR towards users (80 dB)
    rho_e: float = 1e5            # linear transmit SNR towards Eves (50 dB)
    a_s: float = 0.3
    a_w: float = 0.7
    R_s: float = 0.1              # bit/channel use
    R_w: float = 0.1
    N: int = 25
    fading: FadingParams = field(default_factory=FadingParams)
    eve_trunc_radius: float = 500.0   # m, simulation only
    shared_first_hop: bool = False    # simulation only
    M: int = 30                       # quadrature order for the closed forms

    def __post_init__(self):
        if abs(self.a_s + self.a_w - 1.0) > 1e-9:
            raise ConfigError(f"power allocation must satisfy a_s + a_w = 1 (got {self.a_s} + {self.a_w})")
        if not (0 < self.a_s < self.a_w):
            raise ConfigError(f"power allocation must satisfy 0 < a_s < a_w (got a_s={self.a_s}, a_w={self.a_w})")
        if not self.alpha > 2:
            raise ConfigError(f"path-loss exponent must satisfy alpha > 2 (got {self.alpha})")
        for name in ("l_BR", "R_U", "C_r", "rho_b", "rho_e", "eve_trunc_radius"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be > 0 (got {getattr(self, name)})")
        if self.lambda_e < 0:
            raise ConfigError(f"lambda_e must be >= 0 (got {self.lambda_e})")
        if self.R_s < 0 or self.R_w < 0:
            raise ConfigError("target rates must be >= 0")
        if int(self.N) != self.N or self.N < 1:
            raise ConfigError(f"N must be a positive integer (got {self.N})")
        if int(self.M) != self.M or self.M < 1:
            raise ConfigError(f"M must be a positive integer (got {self.M})")

    @property
    def delta(self) -> float:
        return 2.0 / self.alpha

    @property
    def A_L(self) -> float:
        return self.C_r * self.l_BR ** (-self.alpha)

    def with_(self, **changes) -> "NetworkConfig":
        return replace(self, **changes)

    def as_dict(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = v.__dict__.copy() if isinstance(v, FadingParams) else v
        return out


def path_loss(d, cfg: NetworkConfig):
    """C_r (l_BR d)^-alpha."""
    d_arr = np.asarray(d, dtype=float)
    if np.any(d_arr <= 0):
        raise DomainError("path_loss requires d > 0")
    out = cfg.C_r * (cfg.l_BR * d_arr) ** (-cfg.alpha)
    return float(out) if out.ndim == 0 else out


def sample_disc_distances(radius: float, rng: np.random.Generator, size) -> np.ndarray:
    """Distances of points uniform in a disc; exact zeros are redrawn."""
    d = radius * np.sqrt(rng.random(size))
    bad = d <= 0
    while bad.any():
        d[bad] = radius * np.sqrt(rng.random(int(bad.sum())))
        bad = d <= 0
    return d


def sample_lu_pair(cfg: NetworkConfig, rng: np.random.Generator):
    """(d_R, d_T): one reflecting and one transmitting user, both disc-uniform."""
    d = sample_disc_distances(cfg.R_U, rng, 2)
    return float(d[0]), float(d[1])


def sample_eve_field(cfg: NetworkConfig, rng: np.random.Generator) -> np.ndarray:
    """Eve distances of a Poisson field truncated to radius eve_trunc_radius."""
    mean = cfg.lambda_e * math.pi * cfg.eve_trunc_radius**2
    n = rng.poisson(mean) if mean > 0 else 0
    return sample_disc_distances(cfg.eve_trunc_radius, rng, n)


def _scaled_arg(x, stats: CascadedStats, cfg: NetworkConfig):
    return np.asarray(x, dtype=float) * cfg.R_U**cfg.alpha / (cfg.A_L * stats.theta_r)


def unordered_user_cdf(x: float, stats: CascadedStats, cfg: NetworkConfig, abs_tol: float = 1e-9) -> float:
    """CDF of a disc-uniform user's channel power by direct quadrature.

    (2 / R_U^2) int_0^R_U P(k_r, x r^alpha / (A_L theta_r)) r dr
    """
    if x < 0:
        raise DomainError("x must be >= 0")
    if x == 0:
        return 0.0
    y = float(_scaled_arg(x, stats, cfg))

    def integrand(u):
        return 2.0 * u * reg_gamma_pq(stats.k_r, y * u**cfg.alpha)[0]

    res = adaptive_integrate(integrand, 0.0, 1.0, abs_tol=abs_tol)
    return min(max(res.value, 0.0), 1.0)


def unordered_user_cdf_pair(x, stats: CascadedStats, cfg: NetworkConfig):
    """(F, 1 - F) of the unordered user channel power, vectorised.

    Integrating the disc average by parts gives
    F = P(k, y) - y^-delta Gamma(k+delta)/Gamma(k) P(k+delta, y) with
    y = x R_U^alpha / (A_L theta_r); for y < 1 a term-wise series is used
    instead because the difference cancels there.
    """
    y = np.atleast_1d(_scaled_arg(x, stats, cfg)).astype(float)
    k, delta = stats.k_r, cfg.delta
    F = np.zeros_like(y)
    Fc = np.ones_like(y)

    small = (y > 0) & (y < 1.0)
    if small.any():
        ys = y[small]
        n = np.arange(60)
        log_fact = np.array([math.lgamma(i + 1.0) for i in n])
        coeff = np.exp(-log_fact) / ((k + n) * (1.0 + (k + n) / delta))
        series = ((-ys[:, None]) ** n[None, :] * coeff[None, :]).sum(axis=1)
        F[small] = np.exp(k * np.log(ys) - math.lgamma(k)) * series
        Fc[small] = 1.0 - F[small]

    big = y >= 1.0
    if big.any():
        yb = y[big]
        p_k, q_k = reg_gamma_pq(k, np.where(np.isinf(yb), 1.0, yb))
        p_kd, _ = reg_gamma_pq(k + delta, np.where(np.isinf(yb), 1.0, yb))
        ratio = np.exp(math.lgamma(k + delta) - math.lgamma(k) - delta * np.log(yb))
        F[big] = p_k - ratio * p_kd
        Fc[big] = q_k + ratio * p_kd
        inf = np.isinf(yb)
        if inf.any():
            F[np.flatnonzero(big)[inf]] = 1.0
            Fc[np.flatnonzero(big)[inf]] = 0.0
    F = np.clip(F, 0.0, 1.0)
    Fc = np.clip(Fc, 0.0, 1.0)
    if np.ndim(x) == 0:
        return float(F[0]), float(Fc[0])
    return F.reshape(np.shape(x)), Fc.reshape(np.shape(x))


def order_statistics(F):
    """Two-user order statistics from the unordered CDF: (F_strong, F_weak)."""
    F = np.asarray(F, dtype=float)
    fs, fw = F * F, 2.0 * F - F * F
    if fs.ndim == 0:
        return float(fs), float(fw)
    return fs, fw


def ordered_user_cdfs(x, stats: CascadedStats, cfg: NetworkConfig):
    """(F_Hs, F_Hw): CDFs of the stronger and weaker user's channel power."""
    F, _ = unordered_user_cdf_pair(x, stats, cfg)
    return order_statistics(F)


def ordered_user_ccdfs(x, stats: CascadedStats, cfg: NetworkConfig):
    """(1 - F_Hs, 1 - F_Hw), kept accurate in the upper tail."""
    F, Fc = unordered_user_cdf_pair(x, stats, cfg)
    Fc = np.asarray(Fc)
    s, w = Fc * (2.0 - Fc), Fc * Fc
    if s.ndim == 0:
        return float(s), float(w)
    return s, w


@dataclass(frozen=True)
class SmallArgumentLaw:
    """Constants of the x -> 0 power law of the unordered CDF."""

    mu_hat: float
    K_u: int
    A_u: float          # K_u closed form (K_u branch, Gamma(|mu1-mu2|))
    L_u: float          # K_u closed form
    A_u_exact: float    # Laplace-transform constant re-derived from the Meijer-G expansion
    L_u_exact: float    # includes the 1 / (Gamma(2 mu_hat N + 1)(alpha mu_hat N + 2)) factor


def small_argument_law(p: FadingParams, N: int, cfg: NetworkConfig) -> SmallArgumentLaw:
    """Constants of F(x) ~ L_u x^{mu_hat N} as x -> 0.

    Returns both the K_u closed-form constant (``L_u``; infinite when
    mu1 == mu2 because of Gamma(0)) and the constant that the underlying
    Laplace-transform argument actually yields (``L_u_exact``, finite only
    for mu1 != mu2).
    """
    mu_hat = min(p.mu1, p.mu2)
    K_u = 2 if p.mu1 == p.mu2 else 1
    rho00 = 1.0 / (math.gamma(p.mu1) * math.gamma(p.mu2))
    alpha, R, A_L = cfg.alpha, cfg.R_U, cfg.A_L
    e = math.exp(p.mu1 * p.kappa1 + p.mu2 * p.kappa2)
    if p.mu1 == p.mu2:
        A_u = math.inf
        A_exact = math.inf
    else:
        core = (rho00 * (p.phi1 * p.phi2) ** mu_hat * math.gamma(abs(p.mu1 - p.mu2))
                * math.gamma(0.5 + mu_hat) * math.gamma(mu_hat) / (math.sqrt(math.pi) * e))
        A_u = K_u * core
        A_exact = 4.0**mu_hat * core
    n = mu_hat * N
    L_u = 2.0 * A_u**N * R ** (alpha * n) / A_L**n
    L_exact = 2.0 * A_exact**N * R ** (alpha * n) / (A_L**n * math.gamma(2 * n + 1) * (alpha * n + 2.0))
    return SmallArgumentLaw(mu_hat, K_u, A_u, L_u, A_exact, L_exact)


def asymptotic_unordered_log_cdf(x, p: FadingParams, N: int, cfg: NetworkConfig, exact_constant: bool = True):
    """log of L_u x^{mu_hat N}; stays finite where the value itself underflows."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("asymptotic law needs x > 0")
    law = small_argument_law(p, N, cfg)
    L = law.L_u_exact if exact_constant else law.L_u
    out = math.log(L) + law.mu_hat * N * np.log(x)
    return float(out) if out.ndim == 0 else out


def asymptotic_unordered_cdf(x, p: FadingParams, N: int, cfg: NetworkConfig, exact_constant: bool = True):
    return np.exp(asymptotic_unordered_log_cdf(x, p, N, cfg, exact_constant))


def nakagami_sum_cdf_grid(model: DoubleNakagami, N: int, s_max: float, n: int = 4001):
    """CDF of sum_n Delta_n for N i.i.d. double-Nakagami products on [0, s_max].

    Exact (no Gamma fit): the product density is convolved N-1 times on a
    uniform grid with the trapezoidal rule, and a second grid of half the
    spacing is combined by Richardson extrapolation.
    """
    def on_grid(m):
        t = np.linspace(0.0, s_max, m)
        h = t[1] - t[0]
        f = np.array([0.0] + [table1_pdf(model, v) for v in t[1:]])
        g = f.copy()
        for _ in range(N - 1):
            # f(0) = g(0) = 0, so the trapezoid end corrections vanish
            g = h * np.convolve(g, f)[:m]
        F = np.concatenate([[0.0], np.cumsum(0.5 * h * (g[1:] + g[:-1]))])
        return t, F

    t, F_coarse = on_grid(n)
    _, F_fine = on_grid(2 * n - 1)
    return t, (4.0 * F_fine[::2] - F_coarse) / 3.0


def exact_unordered_cdf(x, model: DoubleNakagami, N: int, cfg: NetworkConfig, n: int = 4001):
    """Unordered user CDF with the exact small-scale law (double Nakagami only).

    Intended for small x, where the Gamma fit does not reproduce the true
    power-law behaviour. Returns an array matching ``x``.
    """
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    s_top = math.sqrt(xs.max() * cfg.R_U**cfg.alpha / cfg.A_L)
    t, F = nakagami_sum_cdf_grid(model, N, s_top, n)
    pos = F > 0
    log_t, log_F = np.log(t[pos]), np.log(F[pos])

    def F_sum(s):
        out = np.zeros_like(s)
        ok = s > 0
        out[ok] = np.exp(np.interp(np.log(s[ok]), log_t, log_F))
        return out

    res = []
    for xv in xs:
        s_max = math.sqrt(xv * cfg.R_U**cfg.alpha / cfg.A_L)
        val = adaptive_integrate(lambda u: 2.0 * u * F_sum(s_max * u ** (cfg.alpha / 2.0)), 0.0, 1.0,
                                 abs_tol=1e-14 * max(F_sum(np.array([s_max]))[0], 1e-300))
        res.append(val.value)
    return np.array(res).reshape(np.shape(x))
