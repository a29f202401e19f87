"""Cascaded kappa-mu fading through the STAR-RIS.

Per-element products Delta_n = |h_r1,n| |h_r2,n| of two unit-power kappa-mu
envelopes, their moments, the Gamma fit of the coherent aggregate seen by a
legitimate user, the exponential law of the random-phase aggregate seen by
an eavesdropper, closed-form product PDFs for the Rayleigh/Nakagami special
cases, and samplers for the Monte Carlo engine.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .mathkernel import DomainError, bessel_k, hyp1f1

# substituted for kappa = 0 in moment formulas; the 1F1 argument is regular there
KAPPA_FLOOR = 1e-12


@dataclass(frozen=True)
class FadingParams:
    """kappa-mu shape parameters of the BS-RIS hop (1) and RIS-user hop (2)."""

    kappa1: float = 3.0
    mu1: float = 1.0
    kappa2: float = 3.0
    mu2: float = 1.0

    def __post_init__(self):
        if self.kappa1 < 0 or self.kappa2 < 0:
            raise DomainError("kappa must be >= 0")
        if self.mu1 <= 0 or self.mu2 <= 0:
            raise DomainError("mu must be > 0")

    @property
    def phi1(self) -> float:
        return self.mu1 * (self.kappa1 + 1.0)

    @property
    def phi2(self) -> float:
        return self.mu2 * (self.kappa2 + 1.0)


@dataclass(frozen=True)
class CascadedStats:
    m_r: float
    sigma2_r: float
    N: int
    k_r: float
    theta_r: float
    W_e: float

    @property
    def omega_r(self) -> float:
        return 4.0 * self.m_r**2 * self.sigma2_r * self.N + 2.0 * self.sigma2_r**2

    @property
    def mean(self) -> float:
        """Mean of the fitted Gamma law, m_r^2 N^2 + sigma_r^2 N."""
        return self.k_r * self.theta_r

    @property
    def variance(self) -> float:
        return self.k_r * self.theta_r**2


def _log_hop_moment(kappa: float, mu: float, k: float) -> float:
    # log E[R^k] for a unit-power kappa-mu envelope
    kappa = max(kappa, KAPPA_FLOOR)
    phi = mu * (kappa + 1.0)
    log_poch = math.lgamma(mu + k / 2.0) - math.lgamma(mu)
    return log_poch - mu * kappa - (k / 2.0) * math.log(phi) + math.log(hyp1f1(k / 2.0 + mu, mu, kappa * mu))


def cascaded_moment(p: FadingParams, k: float) -> float:
    """k-th moment of the per-element product Delta_n.

    The two hops are independent, so the moment factorises into
    (mu)_{k/2} e^{-mu kappa} phi^{-k/2} 1F1(k/2 + mu; mu; kappa mu) per hop.
    """
    if k < 0:
        raise DomainError(f"moment order must be >= 0, got {k}")
    if k == 0:
        return 1.0
    return math.exp(_log_hop_moment(p.kappa1, p.mu1, k) + _log_hop_moment(p.kappa2, p.mu2, k))


def fit_user_gamma(p: FadingParams, N: int) -> CascadedStats:
    """Gamma fit of (sum_n Delta_n)^2 and exponential scale of the Eve aggregate."""
    if N < 1:
        raise DomainError(f"element count must be >= 1, got {N}")
    m_r = cascaded_moment(p, 1.0)
    sigma2_r = cascaded_moment(p, 2.0) - m_r**2
    if not sigma2_r > 0:
        raise DomainError(f"non-positive product variance {sigma2_r}; moment computation is broken")
    a = m_r**2 * N + sigma2_r
    omega = 4.0 * m_r**2 * sigma2_r * N + 2.0 * sigma2_r**2
    k_r = a**2 / omega
    theta_r = omega * N / a
    W_e = N * (m_r**2 + sigma2_r)
    return CascadedStats(m_r, sigma2_r, int(N), k_r, theta_r, W_e)


def sample_kappa_mu_envelope(kappa: float, mu: int, rng: np.random.Generator, size=None):
    """Draw unit-power kappa-mu envelopes for integer mu.

    R^2 is the sum of mu clusters (X_i + p_i)^2 + Y_i^2 with Gaussian
    in-phase/quadrature parts of variance 1/(2 mu (1 + kappa)) and dominant
    components with total power kappa / (1 + kappa).
    """
    if float(mu) != int(mu) or mu < 1:
        raise DomainError(f"envelope sampler supports positive integer mu only, got {mu}")
    if kappa < 0:
        raise DomainError("kappa must be >= 0")
    mu = int(mu)
    shape = () if size is None else (size if isinstance(size, tuple) else (size,))
    sd = math.sqrt(1.0 / (2.0 * mu * (1.0 + kappa)))
    p = math.sqrt(kappa / (mu * (1.0 + kappa)))
    r2 = np.zeros(shape)
    for _ in range(mu):
        x = rng.standard_normal(shape) * sd + p
        y = rng.standard_normal(shape) * sd
        r2 = r2 + x * x + y * y
    r = np.sqrt(r2)
    return float(r) if size is None else r


def sample_products(p: FadingParams, rng: np.random.Generator, size):
    """Per-element cascaded amplitudes |h_r1,n| |h_r2,n|."""
    return (sample_kappa_mu_envelope(p.kappa1, p.mu1, rng, size)
            * sample_kappa_mu_envelope(p.kappa2, p.mu2, rng, size))


@dataclass(frozen=True)
class DoubleNakagami:
    """Product of two unit-spread Nakagami-m envelopes (kappa -> 0, mu = m)."""

    m1: float
    m2: float

    @property
    def fading(self) -> FadingParams:
        return FadingParams(0.0, self.m1, 0.0, self.m2)


DOUBLE_RAYLEIGH = DoubleNakagami(1.0, 1.0)


def table1_pdf(model: DoubleNakagami, x: float) -> float:
    """Closed-form PDF of the product envelope for the double Nakagami family.

    4 x^{m1+m2-1} (m1 m2)^{(m1+m2)/2} K_{m1-m2}(2 x sqrt(m1 m2)) / (Gamma(m1) Gamma(m2));
    m1 = m2 = 1 gives the double Rayleigh form 4 x K_0(2 x).
    """
    if x <= 0:
        raise DomainError(f"table1_pdf requires x > 0, got {x}")
    m1, m2 = model.m1, model.m2
    z = 2.0 * x * math.sqrt(m1 * m2)
    k = bessel_k(m1 - m2, z)
    if k == 0.0:
        return 0.0
    log_pdf = (math.log(4.0) + (m1 + m2 - 1.0) * math.log(x) + 0.5 * (m1 + m2) * math.log(m1 * m2)
               + math.log(k) - math.lgamma(m1) - math.lgamma(m2))
    return math.exp(log_pdf)
