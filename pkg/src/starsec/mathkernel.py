"""Special functions and quadrature rules.

Everything here is free of domain semantics. Scalar routines follow the
classic series / continued-fraction recipes; the incomplete gamma function
and the adaptive integrator are vectorised over numpy arrays because the
secrecy integrals call them on whole node sets at once.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, NamedTuple

import numpy as np

# series truncation constants shared by bessel_i and hyp1f1
SERIES_REL_TOL = 1e-15
SERIES_MAX_TERMS = 1_000_000

_EPS = np.finfo(float).eps
_TINY = 1e-300


class DomainError(ValueError):
    """Argument outside the domain of a function."""


class ConvergenceError(ArithmeticError):
    """A series, continued fraction or adaptive rule failed to converge."""


def ln_gamma(x):
    """ln Gamma(x) for x > 0 (scalar or array)."""
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise DomainError(f"ln_gamma requires x > 0, got {x!r}")
    if arr.ndim == 0:
        return math.lgamma(float(arr))
    return np.array([math.lgamma(v) for v in arr.ravel()]).reshape(arr.shape)


def _gamma_series(a, x, logpre):
    # P(a, x) = x^a e^-x / Gamma(a+1) * sum_n x^n / ((a+1)...(a+n))
    term = 1.0 / a
    total = term.copy()
    ap = a.copy()
    active = np.ones(a.shape, dtype=bool)
    for _ in range(100_000):
        ap = ap + 1.0
        term = np.where(active, term * x / ap, 0.0)
        total = total + term
        active = np.abs(term) > np.abs(total) * 1e-17
        if not active.any():
            break
    else:
        raise ConvergenceError("incomplete gamma series did not converge")
    return np.exp(logpre) * total


def _gamma_contfrac(a, x, logpre):
    # modified Lentz evaluation of the continued fraction for Q(a, x)
    b = x + 1.0 - a
    c = np.full(a.shape, 1.0 / _TINY)
    d = 1.0 / np.where(np.abs(b) < _TINY, _TINY, b)
    h = d.copy()
    active = np.ones(a.shape, dtype=bool)
    for i in range(1, 100_000):
        an = -i * (i - a)
        b = b + 2.0
        d = an * d + b
        d = np.where(np.abs(d) < _TINY, _TINY, d)
        c = b + an / c
        c = np.where(np.abs(c) < _TINY, _TINY, c)
        d = 1.0 / d
        delta = np.where(active, d * c, 1.0)
        h = h * delta
        active = np.abs(delta - 1.0) > 2.0 * _EPS
        if not active.any():
            break
    else:
        raise ConvergenceError("incomplete gamma continued fraction did not converge")
    return np.exp(logpre) * h


def reg_gamma_pq(a, x):
    """Regularised lower and upper incomplete gamma, (P(a,x), Q(a,x)).

    Both tails are returned so that callers can keep relative accuracy in
    whichever one is small. ``x`` may be ``inf``.
    """
    a_arr, x_arr = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(x, dtype=float))
    if np.any(~(a_arr > 0)):
        raise DomainError("reg_gamma_pq requires a > 0")
    if np.any(~(x_arr >= 0)):
        raise DomainError("reg_gamma_pq requires x >= 0")
    a_f = a_arr.ravel()
    x_f = x_arr.ravel()
    p = np.zeros_like(x_f)
    q = np.ones_like(x_f)

    inf = np.isinf(x_f)
    p[inf], q[inf] = 1.0, 0.0
    work = (x_f > 0) & ~inf
    if work.any():
        aw, xw = a_f[work], x_f[work]
        lg = ln_gamma(aw)
        logpre = aw * np.log(xw) - xw - lg
        ser = xw < aw + 1.0
        pw = np.empty_like(xw)
        qw = np.empty_like(xw)
        # prefactor underflow: the small tail is exactly zero in double precision
        gone = logpre < -760.0
        pw[gone & ser], qw[gone & ser] = 0.0, 1.0
        pw[gone & ~ser], qw[gone & ~ser] = 1.0, 0.0
        ser = ser & ~gone
        if ser.any():
            pw[ser] = _gamma_series(aw[ser], xw[ser], logpre[ser])
            qw[ser] = 1.0 - pw[ser]
        cf = ~ser & ~gone
        if cf.any():
            qw[cf] = _gamma_contfrac(aw[cf], xw[cf], logpre[cf])
            pw[cf] = 1.0 - qw[cf]
        p[work] = np.clip(pw, 0.0, 1.0)
        q[work] = np.clip(qw, 0.0, 1.0)
    shape = a_arr.shape
    if shape == ():
        return float(p[0]), float(q[0])
    return p.reshape(shape), q.reshape(shape)


def reg_lower_incomplete_gamma(a, x):
    """P(a, x) = gamma(a, x) / Gamma(a)."""
    return reg_gamma_pq(a, x)[0]


def reg_upper_incomplete_gamma(a, x):
    """Q(a, x) = 1 - P(a, x), computed without cancellation."""
    return reg_gamma_pq(a, x)[1]


def bessel_i(nu: float, x: float) -> float:
    """Modified Bessel function of the first kind by its power series.

    Terms are accumulated from ``(x/2)^nu / Gamma(nu+1)`` with the ratio
    ``(x/2)^2 / ((k+1)(k+nu+1))``; the leading factor is formed in log space
    so that only a genuinely unrepresentable result overflows.
    """
    if nu < 0 or x < 0:
        raise DomainError(f"bessel_i requires nu >= 0 and x >= 0, got ({nu}, {x})")
    if x == 0.0:
        return 1.0 if nu == 0 else 0.0
    log_lead = nu * (math.log(x) - math.log(2.0)) - math.lgamma(nu + 1.0)
    q = 0.25 * x * x
    term, total = 1.0, 1.0
    log_scale = 0.0
    for k in range(SERIES_MAX_TERMS):
        ratio = q / ((k + 1.0) * (k + nu + 1.0))
        term *= ratio
        total += term
        if total > 1e250:
            total /= 1e250
            term /= 1e250
            log_scale += 250.0 * math.log(10.0)
        if ratio < 1.0 and term < SERIES_REL_TOL * total:
            break
    else:
        raise ConvergenceError("bessel_i series exceeded the term limit")
    log_val = log_lead + log_scale + math.log(total)
    if log_val > math.log(np.finfo(float).max):
        raise OverflowError(f"bessel_i({nu}, {x}) exceeds the floating range")
    return math.exp(log_val)


def bessel_k(nu: float, x: float) -> float:
    """Modified Bessel function of the second kind, K_nu(x) for x > 0.

    Uses K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt with the
    trapezoidal rule, which converges geometrically for this integrand.
    """
    if x <= 0:
        raise DomainError(f"bessel_k requires x > 0, got {x}")
    nu = abs(nu)
    # integrand is negligible once x cosh t - nu t exceeds ~745 + log-scale
    t_max = math.acosh(max(1.0, (750.0 + nu * 50.0) / x)) + 1.0
    t_max = max(t_max, 1.0)
    h = 0.05
    t = np.arange(0.0, t_max + h, h)
    log_f = -x * np.cosh(t) + nu * t + np.log1p(np.exp(-2.0 * nu * t)) - math.log(2.0)
    shift = log_f.max()
    f = np.exp(log_f - shift)
    s = h * (f.sum() - 0.5 * f[0] - 0.5 * f[-1])
    return float(math.exp(shift) * s)


def hyp1f1(a: float, b: float, x: float) -> float:
    """Confluent hypergeometric 1F1(a; b; x) by the Kummer series.

    Negative arguments go through Kummer's transformation
    1F1(a; b; x) = e^x 1F1(b - a; b; -x) to avoid alternating cancellation.
    """
    if b <= 0 and float(b).is_integer():
        raise DomainError(f"hyp1f1 undefined for nonpositive integer b={b}")
    if x == 0.0:
        return 1.0
    if x < 0:
        return math.exp(x) * _kummer_series(b - a, b, -x)
    return _kummer_series(a, b, x)


def _kummer_series(a, b, x):
    term, total = 1.0, 1.0
    for n in range(SERIES_MAX_TERMS):
        term *= (a + n) * x / ((b + n) * (n + 1.0))
        total += term
        if term == 0.0:
            return total
        # terms keep growing while (a+n)x/((b+n)(n+1)) > 1; only stop after the peak
        if abs(term) < SERIES_REL_TOL * abs(total) and abs((a + n + 1) * x) < abs((b + n + 1) * (n + 2)):
            return total
    raise ConvergenceError(f"hyp1f1({a}, {b}, {x}) exceeded {SERIES_MAX_TERMS} terms")


class RuleKind(str, Enum):
    GAUSS_LAGUERRE = "GaussLaguerre"
    CHEBYSHEV_GAUSS = "ChebyshevGauss"


def _frozen(arr):
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class QuadratureRule:
    kind: RuleKind
    order: int
    nodes: np.ndarray
    weights: np.ndarray
    # Gauss-Laguerre only: weights * exp(nodes), the form used when the
    # integrand is not written with an explicit e^{-x} factor
    scaled_weights: np.ndarray | None = field(default=None)

    def integrate(self, f: Callable[[np.ndarray], np.ndarray]) -> float:
        """Apply the rule to ``f``: sum of weights * f(nodes)."""
        return float(np.dot(self.weights, f(self.nodes)))


def _laguerre_and_prev(n: int, x: np.ndarray):
    # returns (L_n(x), L_{n-1}(x), log_scale) with periodic rescaling so
    # high orders at large x do not overflow
    p_prev = np.ones_like(x)
    p = 1.0 - x
    log_scale = np.zeros_like(x)
    if n == 0:
        return p_prev, np.zeros_like(x), log_scale
    for k in range(1, n):
        p_next = ((2 * k + 1 - x) * p - k * p_prev) / (k + 1)
        p_prev, p = p, p_next
        big = np.abs(p) > 1e150
        if big.any():
            p = np.where(big, p * 1e-150, p)
            p_prev = np.where(big, p_prev * 1e-150, p_prev)
            log_scale = log_scale + np.where(big, 150 * math.log(10.0), 0.0)
    return p, p_prev, log_scale


def gauss_laguerre(M: int) -> QuadratureRule:
    """Gauss-Laguerre rule on [0, inf) with weight e^{-x}.

    Nodes come from the Golub-Welsch eigenproblem and are polished by
    Newton steps on L_M; weights use w = x / ((M+1)^2 L_{M+1}(x)^2).
    """
    if not (isinstance(M, (int, np.integer)) and 1 <= M <= 200):
        raise DomainError(f"gauss_laguerre order must be an integer in [1, 200], got {M!r}")
    M = int(M)
    i = np.arange(1, M)
    jacobi = np.diag(2.0 * np.arange(M) + 1.0) - np.diag(i, 1) - np.diag(i, -1)
    x = np.sort(np.linalg.eigvalsh(jacobi))
    for _ in range(3):
        lm, lm1, _ = _laguerre_and_prev(M, x)
        deriv = M * (lm - lm1) / x
        step = np.where(deriv != 0, lm / deriv, 0.0)
        x = x - step
    l_next, _, log_scale = _laguerre_and_prev(M + 1, x)
    log_w = np.log(x) - 2.0 * math.log(M + 1) - 2.0 * (np.log(np.abs(l_next)) + log_scale)
    return QuadratureRule(
        RuleKind.GAUSS_LAGUERRE, M, _frozen(x), _frozen(np.exp(log_w)), _frozen(np.exp(log_w + x))
    )


def chebyshev_gauss(M: int) -> QuadratureRule:
    """Chebyshev-Gauss nodes cos((2m-1)pi/2M) with weights (pi/M) sqrt(1 - node^2).

    With these weights the rule approximates the plain integral over [-1, 1].
    """
    if not (isinstance(M, (int, np.integer)) and 1 <= M <= 500):
        raise DomainError(f"chebyshev_gauss order must be an integer in [1, 500], got {M!r}")
    M = int(M)
    m = np.arange(1, M + 1)
    nodes = np.cos((2 * m - 1) * np.pi / (2 * M))
    nodes[np.abs(nodes) < 1e-15] = 0.0
    weights = (np.pi / M) * np.sqrt(1.0 - nodes**2)
    return QuadratureRule(RuleKind.CHEBYSHEV_GAUSS, M, _frozen(nodes), _frozen(weights))


# 7-point Gauss / 15-point Kronrod pair on [-1, 1]
_XK = np.array([
    -0.991455371120812639206854697526329, -0.949107912342758524526189684047851,
    -0.864864423359769072789712788640926, -0.741531185599394439863864773280788,
    -0.586087235467691130294144845693013, -0.405845151377397166906606412076961,
    -0.207784955007898467600689403773245, 0.0,
    0.207784955007898467600689403773245, 0.405845151377397166906606412076961,
    0.586087235467691130294144845693013, 0.741531185599394439863864773280788,
    0.864864423359769072789712788640926, 0.949107912342758524526189684047851,
    0.991455371120812639206854697526329,
])
_WK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
    0.204432940075298892414161999234649, 0.190350578064785409913256402421014,
    0.169004726639267902826583426598550, 0.140653259715525918745189590510238,
    0.104790010322250183839876322541518, 0.063092092629978553290700663189204,
    0.022935322010529224963732008058970,
])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
    0.381830050505118944950369775488975, 0.279705391489276667901467771423780,
    0.129484966168869693270611432679082,
])
_G_IDX = np.arange(1, 15, 2)


class IntegrationResult(NamedTuple):
    value: float
    error: float
    converged: bool


def adaptive_integrate(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    abs_tol: float = 1e-9,
    max_depth: int = 15,
    initial_panels: int = 16,
) -> IntegrationResult:
    """Nested Gauss-Kronrod (G7/K15) integration of a vectorised integrand.

    Panels are bisected level by level; a panel is accepted once its
    |K15 - G7| estimate is below ``abs_tol`` times its share of [a, b], so
    the accepted errors sum to at most ``abs_tol``. Panels still failing at
    ``max_depth`` bisections are kept and flagged via ``converged=False``.
    """
    if not (np.isfinite(a) and np.isfinite(b)):
        raise DomainError("adaptive_integrate needs finite limits; map infinite ranges first")
    if b == a:
        return IntegrationResult(0.0, 0.0, True)
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0
    length = b - a
    edges = np.linspace(a, b, initial_panels + 1)
    lo, hi = edges[:-1], edges[1:]
    total, err_total = 0.0, 0.0
    converged = True
    for depth in range(max_depth + 1):
        mid = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        x = mid[:, None] + half[:, None] * _XK[None, :]
        fx = np.asarray(f(x.ravel()), dtype=float).reshape(x.shape)
        if not np.all(np.isfinite(fx)):
            raise ConvergenceError("integrand returned a non-finite value")
        kron = half * (fx @ _WK)
        gauss = half * (fx[:, _G_IDX] @ _WG)
        err = np.abs(kron - gauss)
        ok = err <= abs_tol * (hi - lo) / length
        if depth == max_depth:
            if not ok.all():
                converged = False
            ok[:] = True
        total += kron[ok].sum()
        err_total += err[ok].sum()
        if ok.all():
            break
        lo_s, hi_s = lo[~ok], hi[~ok]
        mid_s = 0.5 * (lo_s + hi_s)
        lo = np.concatenate([lo_s, mid_s])
        hi = np.concatenate([mid_s, hi_s])
    return IntegrationResult(sign * float(total), float(err_total), converged)
