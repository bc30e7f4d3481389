"""Photon-number statistics of the pulses sent to Bob.

Alice classifies each pulse by whether its monitored intensity lies above
(signal) or below (decoy) the threshold. Folding theta = theta2 - theta1
onto [0, pi] (the intensity only depends on cos theta), the signal class
is theta in [0, theta_L] and the decoy class theta in [theta_L, pi]; each
class is a uniform mixture of Poisson distributions with mean
gamma(theta) = 2 mu t (1 + cos theta).
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as sp

from .errors import DomainError
from .quadrature import ABS_TOL, REL_TOL, GaussLegendre, integrate
from .source import SourceConfig, theta_lambda
from .special import a_minus, a_plus, bessel_i, struve_l

INTERVALS = ("signal", "decoy")
N_MAX_DEFAULT = 12
_HALF_PI_TOL = 1e-12


def interval_bounds(interval, theta_l):
    if interval == "signal":
        return 0.0, theta_l
    if interval == "decoy":
        return theta_l, math.pi
    if interval == "full":
        return 0.0, math.pi
    raise DomainError(f"unknown interval {interval!r}")


def interval_probability(interval, theta_l):
    a, b = interval_bounds(interval, theta_l)
    return (b - a) / math.pi


def poisson_pmf(n, mean):
    """Poisson probability, elementwise in ``mean``; exact 0**0 = 1 at mean 0."""
    mean = np.asarray(mean, dtype=float)
    with np.errstate(divide="ignore"):
        logp = -mean + sp.xlogy(n, mean) - math.lgamma(n + 1)
    return np.exp(logp)


@dataclass(frozen=True)
class PhotonStats:
    p_signal: tuple
    p_decoy: tuple
    n_max: int
    tail_bound: float
    p_s: float
    p_d: float

    def p(self, interval):
        if interval == "signal":
            return self.p_signal
        if interval == "decoy":
            return self.p_decoy
        raise DomainError(f"unknown interval {interval!r}")

    def weight(self, interval):
        return self.p_s if interval == "signal" else self.p_d


def pn_numeric(n, interval, cfg: SourceConfig, abs_tol=ABS_TOL, rel_tol=REL_TOL):
    """Interval average of the Poisson(gamma(theta)) probability of ``n`` photons."""
    if n < 0:
        raise DomainError("photon number must be >= 0")
    a, b = interval_bounds(interval, theta_lambda(cfg))
    z = 2.0 * cfg.mu_t
    lg = math.lgamma(n + 1)

    def integrand(th):
        g = z * (1.0 + math.cos(th))
        if g == 0.0:
            return 1.0 if n == 0 else 0.0
        return math.exp(-g + n * math.log(g) - lg)

    value, _ = integrate(integrand, a, b, abs_tol=abs_tol * (b - a), rel_tol=rel_tol)
    return value / (b - a)


def pn_closed_form(n, interval, zeta, theta_l=math.pi / 2):
    """Closed forms of p_0, p_1, p_2 at theta_L = pi/2; ``zeta`` is 2 mu t."""
    if abs(theta_l - math.pi / 2) > _HALF_PI_TOL:
        raise DomainError("closed forms hold only for theta_lambda = pi/2")
    if n not in (0, 1, 2):
        raise DomainError("closed forms exist for n in {0, 1, 2}")
    if interval == "signal":
        s, a = -1.0, a_minus(zeta)
    elif interval == "decoy":
        s, a = 1.0, a_plus(zeta)
    else:
        raise DomainError(f"unknown interval {interval!r}")
    if n == 0:
        return a
    e = math.exp(-zeta)
    i1_l = bessel_i(1, zeta) + s * struve_l(-1, zeta)
    if n == 1:
        return zeta * (a - e * i1_l)
    i2_l = bessel_i(2, zeta) + s * struve_l(2, zeta)
    bracket = -s * (2.0 / math.pi) * (1.0 - zeta * zeta / 3.0) + (1.0 - 2.0 * zeta) * i1_l + zeta * i2_l
    return 0.5 * zeta * (zeta * a + e * bracket)


def p_acc(omega):
    """Probability that the measured polarization angle falls in an acceptance arc."""
    if not 0.0 <= omega <= math.pi / 4:
        raise DomainError(f"omega must lie in [0, pi/4] (got {omega})")
    return 1.0 - 4.0 * omega / math.pi


def tail_bound(mu_t, n_max):
    """Poisson tail beyond n_max at the largest intensity 4 mu t."""
    return float(sp.pdtrc(n_max, 4.0 * mu_t))


def gauss_pn(interval_range, zeta, n_max, rule=None):
    rule = rule or GaussLegendre()
    th, w = rule.nodes(*interval_range)
    g = zeta * (1.0 + np.cos(th))
    return [float(np.dot(w, poisson_pmf(n, g))) for n in range(n_max + 1)]


def build_stats(cfg: SourceConfig, n_max=N_MAX_DEFAULT, method="auto"):
    """Fill PhotonStats for both intervals.

    ``method``: "auto" uses the closed forms for n <= 2 when theta_L = pi/2
    and adaptive quadrature elsewhere; "adaptive" never uses closed forms;
    "gauss" uses the fixed Gauss-Legendre rule throughout.
    """
    if n_max < 2:
        raise DomainError("n_max must be >= 2")
    th_l = theta_lambda(cfg)
    z = 2.0 * cfg.mu_t
    closed_ok = method == "auto" and abs(th_l - math.pi / 2) <= _HALF_PI_TOL
    out = {}
    for interval in INTERVALS:
        if method == "gauss":
            out[interval] = tuple(gauss_pn(interval_bounds(interval, th_l), z, n_max))
            continue
        row = []
        for n in range(n_max + 1):
            if closed_ok and n <= 2:
                row.append(pn_closed_form(n, interval, z, th_l))
            else:
                row.append(pn_numeric(n, interval, cfg))
        out[interval] = tuple(row)
    p_s = th_l / math.pi
    return PhotonStats(
        p_signal=out["signal"],
        p_decoy=out["decoy"],
        n_max=n_max,
        tail_bound=tail_bound(cfg.mu_t, n_max),
        p_s=p_s,
        p_d=1.0 - p_s,
    )
