"""Event-level Monte Carlo of the transmitter, channel and receiver.

Each sample draws the four phases uniformly, classifies the pulse by its
monitored intensity, checks the polarization against the acceptance arcs,
draws a Poisson photon number and, for accepted pulses, routes every photon
to the correct or wrong detector arm (probability (1 + cos delta)/2 for the
correct one, delta being the offset from the nearest BB84 setting) before
loss and dark counts.

Randomness comes from a counter-based SplitMix64 stream: draw j of sample i
uses counter i * 4096 + j under a key derived from the seed. Any split of
the sample range into shards therefore yields identical merged counts.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import stats as sps

from . import _fallback
from ._backend import kernels
from .detection import ChannelConfig, click_probabilities, eta_sys, gain_numeric, qber_interval
from .errors import DomainError
from .photon_stats import INTERVALS, p_acc, pn_numeric
from .source import SourceConfig, theta_lambda

GENERATOR = "splitmix64-counter"
N_BINS = 16
N_COMPARE = 4


@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float

    @classmethod
    def binomial(cls, hits, trials):
        if trials == 0:
            return cls(float("nan"), float("nan"))
        p = hits / trials
        return cls(p, math.sqrt(p * (1.0 - p) / trials))


@dataclass(frozen=True)
class McReport:
    n_samples: int
    seed: int
    generator: str
    p_acc_hat: Estimate
    p_interval_hat: dict
    pn_hat: dict
    q_hat: dict = None
    e_hat: dict = None
    counts: tuple = ()


def derive_key(seed):
    """64-bit stream key from a user seed (one SplitMix64 scramble)."""
    if not 0 <= seed < 2**64:
        raise DomainError("seed must be a 64-bit unsigned integer")
    with np.errstate(over="ignore"):
        return int(_fallback._mix(np.uint64(seed) + _fallback._GOLDEN))


def _layout(n_bins):
    return 2 + 2 * (4 + n_bins)


def _run(src, eta, eps, n, seed, detect, shards, workers, n_bins=N_BINS):
    if n < 1:
        raise DomainError(f"sample count must be >= 1 (got {n})")
    if shards < 1:
        raise DomainError("shards must be >= 1")
    key = derive_key(seed)
    edges = np.linspace(0, n, shards + 1).astype(np.int64)
    size = _layout(n_bins)

    def shard(j):
        c = np.zeros(size, dtype=np.int64)
        kernels.mc_events(key, int(edges[j]), int(edges[j + 1]), src.mu, src.t, src.lambda_threshold,
                          src.omega, eta, eps, bool(detect), n_bins, c)
        return c

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(shard, range(shards)))
    else:
        parts = [shard(j) for j in range(shards)]
    return np.sum(parts, axis=0)


def _report(counts, n, seed, detect, n_bins=N_BINS):
    total, accepted = int(counts[0]), int(counts[1])
    p_int, pn, q, e = {}, {}, {}, {}
    for j, name in enumerate(INTERVALS):
        off = 2 + j * (4 + n_bins)
        n_i, n_acc, clicks, errors = (int(v) for v in counts[off:off + 4])
        hist = counts[off + 4:off + 4 + n_bins]
        p_int[name] = Estimate.binomial(n_i, total)
        pn[name] = tuple(Estimate.binomial(int(h), n_i) for h in hist)
        if detect:
            q[name] = Estimate.binomial(clicks, n_acc)
            e[name] = Estimate.binomial(errors, clicks)
    return McReport(
        n_samples=n,
        seed=seed,
        generator=GENERATOR,
        p_acc_hat=Estimate.binomial(accepted, total),
        p_interval_hat=p_int,
        pn_hat=pn,
        q_hat=q if detect else None,
        e_hat=e if detect else None,
        counts=tuple(int(v) for v in counts),
    )


def run_source_mc(cfg: SourceConfig, n, seed, shards=1, workers=1):
    """Source-only statistics: acceptance, interval split, photon-number histograms."""
    counts = _run(cfg, 0.0, 0.0, n, seed, False, shards, workers)
    return _report(counts, n, seed, False)


def run_detection_mc(cfg: SourceConfig, ch: ChannelConfig, n, seed, shards=1, workers=1):
    """Source statistics plus per-interval gains and error rates."""
    counts = _run(cfg, eta_sys(ch), ch.epsilon_B, n, seed, True, shards, workers)
    return _report(counts, n, seed, True)


def forced_click_mc(k, delta, ch: ChannelConfig, n, seed):
    """Outcome frequencies for ``k`` photons at fixed polarization offset ``delta``.

    Returns empirical ``(p_vac, p_det0, p_det1, p_dc)`` with detector 0 the
    correct arm, using the same per-photon routing as the full simulation.
    """
    if n < 1:
        raise DomainError("sample count must be >= 1")
    key = derive_key(seed)
    base = np.arange(n, dtype=np.uint64) * np.uint64(_fallback.STRIDE)
    ks = np.full(n, k, dtype=np.int64)
    hit_c, hit_w, _ = _fallback.detector_hits(key, base, ks, np.full(n, float(delta)), eta_sys(ch), ch.epsilon_B)
    return (
        float(np.mean(~hit_c & ~hit_w)),
        float(np.mean(hit_c & ~hit_w)),
        float(np.mean(~hit_c & hit_w)),
        float(np.mean(hit_c & hit_w)),
    )


def routed_click_probabilities(k, delta, ch: ChannelConfig):
    """Analytic outcome probabilities of ``k`` photons split binomially between the arms."""
    w = sps.binom.pmf(np.arange(k + 1), k, 0.5 * (1.0 + math.cos(delta)))
    probs = np.array([click_probabilities(j, k - j, ch) for j in range(k + 1)])
    return tuple(float(v) for v in w @ probs)


@dataclass(frozen=True)
class Comparison:
    name: str
    analytic: float
    empirical: float
    stderr: float

    @property
    def z(self):
        if self.stderr == 0.0:
            return 0.0 if self.analytic == self.empirical else math.inf
        return (self.empirical - self.analytic) / self.stderr


def compare(report: McReport, cfg: SourceConfig, ch: ChannelConfig = None, n_max=N_COMPARE):
    """Analytic values next to the Monte Carlo estimates.

    The standard error used for each z-score is the binomial one evaluated
    at the analytic probability, which stays meaningful when a count is 0.
    """
    rows = []

    def add(name, analytic, est, trials):
        se = math.sqrt(max(analytic * (1.0 - analytic), 0.0) / trials) if trials else float("nan")
        rows.append(Comparison(name, analytic, est.value, se))

    total = report.counts[0]
    add("p_acc", p_acc(cfg.omega), report.p_acc_hat, total)
    p_s = theta_lambda(cfg) / math.pi
    for j, name in enumerate(INTERVALS):
        off = 2 + j * (4 + N_BINS)
        n_i, n_acc, clicks = report.counts[off:off + 3]
        add(f"p_{name}", p_s if name == "signal" else 1.0 - p_s, report.p_interval_hat[name], total)
        for n in range(n_max + 1):
            add(f"p{n}_{name}", pn_numeric(n, name, cfg), report.pn_hat[name][n], n_i)
        if report.q_hat is not None and ch is not None:
            add(f"Q_{name}", gain_numeric(name, cfg, ch), report.q_hat[name], n_acc)
            add(f"E_{name}", qber_interval(name, cfg, ch), report.e_hat[name], clicks)
    return rows
