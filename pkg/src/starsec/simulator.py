"""Monte Carlo oracle for the STAR-RIS NOMA secrecy model.

Each realization draws the two user distances, the truncated Poisson Eve
field, the per-element cascaded amplitudes (phase-aligned at the users,
random phases at the Eves) and keeps four channel powers: the reflecting
and transmitting user gains, and the strongest Eve gain on each side.
Transmit SNRs, power split, rates and the protocol enter only afterwards,
so one set of realizations can be re-evaluated across a whole sweep.

Randomness is keyed by (seed, block index) with a fixed block size, which
makes results independent of the worker count.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .analytics import Method, Protocol, ProtocolMode, SecrecyResult
from .fading import sample_kappa_mu_envelope
from .geometry import NetworkConfig, sample_disc_distances

BLOCK = 2048
SOP_RESOLUTION = 1e-3       # SOP estimates below this are flagged unresolved
Z95 = 1.959963984540054
THREADS_ENV = "STARSEC_THREADS"

# config fields that shape the channel draws (everything else is applied afterwards)
_DRAW_FIELDS = ("l_BR", "R_U", "lambda_e", "alpha", "C_r", "N", "fading", "eve_trunc_radius", "shared_first_hop")


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def draw_key(cfg: NetworkConfig):
    return tuple(getattr(cfg, f) for f in _DRAW_FIELDS)


@dataclass(frozen=True)
class ChannelRealizations:
    """H[:, 0|1]: reflecting / transmitting user channel power; Z[:, 0|1]: strongest Eve gain per side.

    d and h2 keep the user distances and small-scale powers (sum of amplitudes squared).
    """

    H: np.ndarray
    Z: np.ndarray
    key: tuple
    d: np.ndarray | None = None
    h2: np.ndarray | None = None

    @property
    def trials(self) -> int:
        return self.H.shape[0]


def _envelopes(p, hop, rng, shape):
    kappa, mu = (p.kappa1, p.mu1) if hop == 1 else (p.kappa2, p.mu2)
    return sample_kappa_mu_envelope(kappa, mu, rng, shape)


def _draw_block(cfg: NetworkConfig, rng: np.random.Generator, n: int):
    p, N = cfg.fading, cfg.N
    d = sample_disc_distances(cfg.R_U, rng, (n, 2))
    first = _envelopes(p, 1, rng, (n, N)) if cfg.shared_first_hop else None
    if first is None:
        lu_amp = _envelopes(p, 1, rng, (n, 2, N)) * _envelopes(p, 2, rng, (n, 2, N))
    else:
        lu_amp = first[:, None, :] * _envelopes(p, 2, rng, (n, 2, N))
    h2 = lu_amp.sum(axis=2) ** 2
    H = cfg.C_r * (cfg.l_BR * d) ** (-cfg.alpha) * h2

    Z = np.zeros((n, 2))
    mean = cfg.lambda_e * math.pi * cfg.eve_trunc_radius**2
    if mean > 0:
        counts = rng.poisson(mean, n)
        total = int(counts.sum())
        if total:
            owner = np.repeat(np.arange(n), counts)
            de = sample_disc_distances(cfg.eve_trunc_radius, rng, total)
            side = (rng.random(total) < 0.5).astype(np.int64)
            if first is None:
                amp = _envelopes(p, 1, rng, (total, N)) * _envelopes(p, 2, rng, (total, N))
            else:
                amp = first[owner] * _envelopes(p, 2, rng, (total, N))
            phase = rng.random((total, N)) * (2.0 * math.pi)
            g = (amp * np.cos(phase)).sum(axis=1) ** 2 + (amp * np.sin(phase)).sum(axis=1) ** 2
            gain = cfg.C_r * (cfg.l_BR * de) ** (-cfg.alpha) * g
            flat = Z.reshape(-1)
            np.maximum.at(flat, owner * 2 + side, gain)
    return H, Z, d, h2


def simulate_channels(cfg: NetworkConfig, trials: int, seed: int = 0, workers: int | None = None) -> ChannelRealizations:
    """Draw ``trials`` independent realizations; deterministic in (cfg, trials, seed)."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    workers = default_workers() if workers is None else max(1, int(workers))
    sizes = [min(BLOCK, trials - start) for start in range(0, trials, BLOCK)]

    def job(b):
        rng = np.random.default_rng(np.random.SeedSequence([int(seed), b]))
        return _draw_block(cfg, rng, sizes[b])

    if workers == 1 or len(sizes) == 1:
        parts = [job(b) for b in range(len(sizes))]
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(job, range(len(sizes))))
    H, Z, d, h2 = (np.concatenate([part[i] for part in parts]) for i in range(4))
    return ChannelRealizations(H, Z, draw_key(cfg), d, h2)


@dataclass(frozen=True)
class TrialOutcome:
    gamma_SIC: np.ndarray
    gamma_s: np.ndarray
    gamma_w: np.ndarray
    gamma_Es: np.ndarray      # worst-case Eve SNR mapped to the user's own side (equivalent SNR)
    gamma_Ew: np.ndarray
    C_Us: np.ndarray
    C_Uw: np.ndarray
    C_Es: np.ndarray
    C_Ew: np.ndarray
    outage_s: np.ndarray
    outage_w: np.ndarray
    strong_is_reflecting: np.ndarray

    @property
    def secrecy_s(self):
        return np.maximum(self.C_Us - self.C_Es, 0.0)

    @property
    def secrecy_w(self):
        return np.maximum(self.C_Uw - self.C_Ew, 0.0)

    def __getitem__(self, i):
        return TrialOutcome(*(np.asarray(getattr(self, f))[i] for f in self.__dataclass_fields__))


def evaluate_outcomes(ch: ChannelRealizations, cfg: NetworkConfig, mode: ProtocolMode) -> TrialOutcome:
    """Per-trial SINRs, capacities and outage flags for given SNRs, power split, rates and mode."""
    if ch.key != draw_key(cfg):
        raise ValueError("realizations were drawn for a different geometry/fading configuration")
    n = ch.trials
    rows = np.arange(n)
    strong_side = np.argmax(ch.H, axis=1)           # 0: reflecting, 1: transmitting
    Hs = ch.H[rows, strong_side]
    Hw = ch.H[rows, 1 - strong_side]
    Zs = ch.Z[rows, strong_side]                    # Eves on the strong user's side
    Zw = ch.Z[rows, 1 - strong_side]
    rho, a_s, a_w = cfg.rho_b, cfg.a_s, cfg.a_w
    ps, pw = mode.param_s, mode.param_w
    ts = mode.kind is Protocol.TS
    cs, cw = (1.0, 1.0) if ts else (ps, pw)

    gamma_sic = cs * a_w * rho * Hs / (cs * a_s * rho * Hs + 1.0)
    gamma_s = cs * a_s * rho * Hs
    gamma_w = cw * a_w * rho * Hw / (cw * a_s * rho * Hw + 1.0)
    # per side capacity of the strongest Eve for each message
    def eve_cap(a):
        if ts:
            return np.maximum(ps * np.log2(1.0 + a * cfg.rho_e * Zs), pw * np.log2(1.0 + a * cfg.rho_e * Zw))
        return np.maximum(np.log2(1.0 + ps * a * cfg.rho_e * Zs), np.log2(1.0 + pw * a * cfg.rho_e * Zw))

    C_Es, C_Ew = eve_cap(a_s), eve_cap(a_w)
    if ts:
        C_Us, C_Uw = ps * np.log2(1.0 + gamma_s), pw * np.log2(1.0 + gamma_w)
    else:
        C_Us, C_Uw = np.log2(1.0 + gamma_s), np.log2(1.0 + gamma_w)

    def equiv(C, p):
        if p == 0:
            return np.zeros_like(C)
        with np.errstate(over="ignore"):
            return np.expm1(C / p * math.log(2.0)) if ts else np.expm1(C * math.log(2.0)) / p

    return TrialOutcome(
        gamma_SIC=gamma_sic, gamma_s=gamma_s, gamma_w=gamma_w,
        gamma_Es=equiv(C_Es, ps), gamma_Ew=equiv(C_Ew, pw),
        C_Us=C_Us, C_Uw=C_Uw, C_Es=C_Es, C_Ew=C_Ew,
        outage_s=(C_Us - C_Es) < cfg.R_s, outage_w=(C_Uw - C_Ew) < cfg.R_w,
        strong_is_reflecting=strong_side == 0,
    )


def run_trial(cfg: NetworkConfig, mode: ProtocolMode, rng: np.random.Generator) -> TrialOutcome:
    """One full realization of the system."""
    H, Z, d, h2 = _draw_block(cfg, rng, 1)
    return evaluate_outcomes(ChannelRealizations(H, Z, draw_key(cfg), d, h2), cfg, mode)[0]


def _seed_of(rng) -> int:
    if rng is None:
        return 0
    if isinstance(rng, np.random.Generator):
        return int(rng.integers(0, 2**63 - 1))
    return int(rng)


def wilson_halfwidth(p_hat: float, n: int, z: float = Z95) -> float:
    z2 = z * z
    return z * math.sqrt(p_hat * (1.0 - p_hat) / n + z2 / (4.0 * n * n)) / (1.0 + z2 / n)


def _realizations(cfg, trials, rng, workers, realizations):
    if realizations is not None:
        return realizations
    if trials < 1000:
        raise ValueError("Monte Carlo estimates need at least 1000 trials")
    return simulate_channels(cfg, trials, _seed_of(rng), workers)


def estimate_sop(cfg: NetworkConfig, mode: ProtocolMode, trials: int = 100_000, rng=None,
                 workers: int | None = None, realizations: ChannelRealizations | None = None) -> SecrecyResult:
    """Outage frequencies with Wilson 95% half-widths; points below 1e-3 are flagged unresolved.

    ``rng`` is an integer seed or a Generator (used only to derive a seed).
    """
    ch = _realizations(cfg, trials, rng, workers, realizations)
    out = evaluate_outcomes(ch, cfg, mode)
    n = ch.trials
    ps, pw = float(out.outage_s.mean()), float(out.outage_w.mean())
    pp = float((out.outage_s | out.outage_w).mean())
    flags = [f"{name}_unresolved" for name, v in (("sop_strong", ps), ("sop_weak", pw), ("sop_pair", pp))
             if v < SOP_RESOLUTION]
    ci = {"sop_strong": wilson_halfwidth(ps, n), "sop_weak": wilson_halfwidth(pw, n),
          "sop_pair": wilson_halfwidth(pp, n)}
    return SecrecyResult(sop_strong=ps, sop_weak=pw, method=Method.MONTE_CARLO, ci_halfwidth=ci,
                         flags=tuple(flags), sop_pair_value=pp)


def estimate_asc(cfg: NetworkConfig, mode: ProtocolMode, trials: int = 100_000, rng=None,
                 workers: int | None = None, realizations: ChannelRealizations | None = None) -> SecrecyResult:
    """Mean clamped secrecy capacity per user and for the pair, with 95% standard-error half-widths."""
    ch = _realizations(cfg, trials, rng, workers, realizations)
    out = evaluate_outcomes(ch, cfg, mode)
    n = ch.trials
    cs, cw = out.secrecy_s, out.secrecy_w
    half = lambda v: Z95 * float(v.std(ddof=1)) / math.sqrt(n)
    ci = {"asc_strong": half(cs), "asc_weak": half(cw), "asc_pair": half(cs + cw)}
    return SecrecyResult(asc_strong=float(cs.mean()), asc_weak=float(cw.mean()),
                         method=Method.MONTE_CARLO, ci_halfwidth=ci)


def empirical_channel_cdf(cfg: NetworkConfig, trials: int = 100_000, rng=None, x=None,
                          workers: int | None = None, realizations: ChannelRealizations | None = None):
    """Empirical CDFs of strong, weak and unordered user channel power on a grid.

    Returns a dict of equal-length arrays: x, F_Hs, F_Hw, F_hat.
    """
    if realizations is None and trials < 10_000:
        raise ValueError("channel CDF estimates need at least 10^4 trials")
    ch = realizations if realizations is not None else simulate_channels(cfg, trials, _seed_of(rng), workers)
    hs = np.sort(ch.H.max(axis=1))
    hw = np.sort(ch.H.min(axis=1))
    hu = np.sort(ch.H.ravel())
    if x is None:
        x = np.quantile(hu, np.linspace(0.005, 0.995, 100))
    x = np.asarray(x, dtype=float)
    ecdf = lambda s: np.searchsorted(s, x, side="right") / s.size
    return {"x": x, "F_Hs": ecdf(hs), "F_Hw": ecdf(hw), "F_hat": ecdf(hu)}
