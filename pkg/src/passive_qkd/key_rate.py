"""Secret key rates.

Per accepted interval i the rate is

    R^i = q p_acc { -Q^i f H(E^i) + [p_1^i Y_1 + p_0^i Y_0] [1 - H(e_1)] }

with the bracket replaced by its decoy lower bound and e_1 by its upper
bound in the estimated version, and R = sum_i p_i max(R^i, 0).
"""

import math
from dataclasses import dataclass

import numpy as np

from .decoy import DecoyBounds, estimate_bounds
from .detection import (
    ChannelConfig,
    ObservedStats,
    eta_sys,
    gauss_moments,
    observe,
    poisson_psi_error,
)
from .errors import DomainError
from .photon_stats import INTERVALS, PhotonStats, build_stats, interval_bounds, p_acc, tail_bound
from .source import SourceConfig, theta_lambda

E1_CAP = 0.5


@dataclass(frozen=True)
class RateResult:
    rate_total: float
    rate_signal: float
    rate_decoy: float
    bounds_used: DecoyBounds
    observed: ObservedStats
    stats: PhotonStats = None

    @property
    def p_signal(self):
        return self.stats.p_s

    def best_partial(self):
        """max_i p_i R^i; negative when no interval yields key (search guidance)."""
        return max(self.stats.p_s * self.rate_signal, self.stats.p_d * self.rate_decoy)


def binary_entropy(x):
    """Binary Shannon entropy in bits; H(0) = H(1) = 0."""
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"binary entropy needs x in [0, 1] (got {x})")
    if x == 0.0 or x == 1.0:
        return 0.0
    return -(x * math.log2(x) + (1.0 - x) * math.log2(1.0 - x))


def yield_n(n, ch: ChannelConfig):
    """Y_n = 1 - (1 - Y_0)(1 - eta_sys)^n, arranged to keep Y_0's digits at small eta."""
    eta = eta_sys(ch)
    if n == 0:
        return ch.y0
    if eta == 1.0:
        return 1.0
    return ch.y0 - (1.0 - ch.y0) * math.expm1(n * math.log1p(-eta))


def true_e1(omega, ch: ChannelConfig):
    """Single-photon error rate averaged over the accepted polarization arc."""
    if not 0.0 <= omega <= math.pi / 4:
        raise DomainError(f"omega must lie in [0, pi/4] (got {omega})")
    eta = eta_sys(ch)
    e = ch.epsilon_B
    x = math.pi / 4 - omega
    # 4 sin(x) / (pi - 4 Omega) = sin(x) / x
    sinc = float(np.sinc(x / math.pi))
    return (ch.y0 + (1.0 - e) ** 2 * eta - (1.0 - e) * eta * sinc) / (2.0 * yield_n(1, ch))


def rate_interval_bounds(interval, stats, obs, bounds, ch, omega):
    """Estimated rate of one interval (may be negative)."""
    q_i, e_i = obs.q(interval), obs.e(interval)
    e1 = min(bounds.e1_upper, E1_CAP)
    leak = q_i * ch.f_ec * binary_entropy(e_i)
    return ch.q_eff * p_acc(omega) * (-leak + bounds.combined(interval) * (1.0 - binary_entropy(e1)))


def rate_interval_exact(interval, stats, obs, ch, omega):
    """Rate of one interval with the true Y_0, Y_1 and e_1 of the channel model."""
    p = stats.p(interval)
    q_i, e_i = obs.q(interval), obs.e(interval)
    single = p[1] * yield_n(1, ch) * (1.0 - binary_entropy(min(true_e1(omega, ch), E1_CAP)))
    return ch.q_eff * p_acc(omega) * (-q_i * ch.f_ec * binary_entropy(e_i) + single + p[0] * ch.y0)


def total_rate(stats, obs, bounds, ch, omega):
    r = {i: rate_interval_bounds(i, stats, obs, bounds, ch, omega) for i in INTERVALS}
    total = stats.p_s * max(r["signal"], 0.0) + stats.p_d * max(r["decoy"], 0.0)
    return RateResult(total, r["signal"], r["decoy"], bounds, obs, stats)


def _gauss_pipeline(src, ch):
    th_l = theta_lambda(src)
    eta = eta_sys(ch)
    omega = min(src.omega, math.pi / 4)
    p, q, e = {}, {}, {}
    for i in INTERVALS:
        pi, qi, ei = gauss_moments(interval_bounds(i, th_l), 2.0 * src.mu_t, eta, ch.epsilon_B, omega)
        p[i], q[i], e[i] = tuple(float(v) for v in pi), float(qi), float(ei)
    p_s = th_l / math.pi
    stats = PhotonStats(p["signal"], p["decoy"], 2, tail_bound(src.mu_t, 2), p_s, 1.0 - p_s)
    obs = ObservedStats(q["signal"], q["decoy"], e["signal"], e["decoy"])
    return stats, obs


def passive_rate(src: SourceConfig, ch: ChannelConfig, method="gauss", check=True):
    """Full two-interval pipeline: statistics, observations, bounds, rate.

    ``method="gauss"`` is the fast fixed-rule path; "adaptive" evaluates the
    definition-level quadratures (closed forms for p_0..p_2 where they hold).
    """
    if src.omega >= math.pi / 4:
        raise DomainError("omega = pi/4 accepts no pulses")
    if method == "gauss":
        stats, obs = _gauss_pipeline(src, ch)
    elif method == "adaptive":
        stats = build_stats(src, n_max=2)
        obs = observe(src, ch, "adaptive")
    else:
        raise DomainError(f"unknown method {method!r}")
    bounds = estimate_bounds(stats, obs, check=check)
    return total_rate(stats, obs, bounds, ch, src.omega)


def asymptotic_passive_rate(zeta, omega, ch: ChannelConfig):
    """Rate of the passive source with perfectly known yields.

    A single interval covers every phase (p_s = 1): the photon statistics,
    gain and QBER are full-range averages, and Y_0, Y_1, e_1 are the channel
    model's exact values.
    """
    if not zeta > 0:
        raise DomainError(f"zeta must be > 0 (got {zeta})")
    if not 0.0 <= omega < math.pi / 4:
        raise DomainError(f"omega must lie in [0, pi/4) (got {omega})")
    p, q, e = gauss_moments((0.0, math.pi), zeta, eta_sys(ch), ch.epsilon_B, omega)
    single = p[1] * yield_n(1, ch) * (1.0 - binary_entropy(min(true_e1(omega, ch), E1_CAP)))
    return float(ch.q_eff * p_acc(omega) * (-q * ch.f_ec * binary_entropy(float(e)) + single + p[0] * ch.y0))


def active_observed(mu, ch: ChannelConfig):
    """Gain and QBER of a perfectly prepared Poisson(mu) BB84 state."""
    return poisson_psi_error(mu, 0.0, ch)


def active_infinite_decoy_rate(mu, ch: ChannelConfig):
    """Active transmitter with infinitely many decoys (exact Y_0, Y_1, e_1)."""
    if not mu > 0:
        raise DomainError(f"mu must be > 0 (got {mu})")
    q_mu, e_mu = active_observed(mu, ch)
    e1 = true_e1(math.pi / 4, ch)
    q1 = mu * math.exp(-mu) * yield_n(1, ch)
    q0 = math.exp(-mu) * ch.y0
    return ch.q_eff * (-q_mu * ch.f_ec * binary_entropy(e_mu) + q1 * (1.0 - binary_entropy(min(e1, E1_CAP))) + q0)
