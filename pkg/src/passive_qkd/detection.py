"""Channel and active BB84 receiver model: gains and error rates.

The channel is a pure-loss beamsplitter; Bob has two threshold detectors
with dark-count probability ``epsilon_B`` each per gate and assigns double
clicks to a random bit. All quantities are averages over the folded phase
theta of the Poisson mixture leaving Alice, and the QBER is additionally
averaged over the accepted polarization arc around psi = 0 (H), where
clicks of the V detector are errors.

Three routes are available for the interval quantities:

* ``adaptive`` integrates the definitions (nested adaptive quadrature for
  the QBER); this is the reference route.
* ``closed`` uses the A_+/- closed forms, valid at theta_L = pi/2 only.
* ``gauss`` applies fixed Gauss-Legendre rules through the compiled kernel;
  it is what the optimizer calls.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .errors import ConsistencyError, DomainError
from .photon_stats import interval_bounds
from .quadrature import GaussLegendre, integrate
from .source import SourceConfig, theta_lambda
from .special import a_minus, a_plus

_HALF_PI_TOL = 1e-12
QBER_CONSISTENCY_TOL = 1e-8
THETA_NODES = 48
PSI_NODES = 32


@dataclass(frozen=True)
class ChannelConfig:
    """Channel, detector and protocol parameters (defaults: the reference set)."""

    alpha: float = 0.2
    distance: float = 0.0
    eta_B: float = 0.045
    epsilon_B: float = 3.2e-7
    q_eff: float = 0.5
    f_ec: float = 1.22

    def __post_init__(self):
        problems = self.violations()
        if problems:
            raise DomainError("; ".join(problems))

    def violations(self):
        out = []
        if not self.alpha >= 0:
            out.append(f"alpha must be >= 0 (got {self.alpha})")
        if not self.distance >= 0:
            out.append(f"distance must be >= 0 (got {self.distance})")
        if not 0.0 < self.eta_B <= 1.0:
            out.append(f"eta_B must lie in (0, 1] (got {self.eta_B})")
        if not 0.0 <= self.epsilon_B < 1.0:
            out.append(f"epsilon_B must lie in [0, 1) (got {self.epsilon_B})")
        if not 0.0 < self.q_eff <= 1.0:
            out.append(f"q_eff must lie in (0, 1] (got {self.q_eff})")
        if not self.f_ec >= 1.0:
            out.append(f"f_ec must be >= 1 (got {self.f_ec})")
        return out

    def at(self, distance):
        return ChannelConfig(self.alpha, distance, self.eta_B, self.epsilon_B, self.q_eff, self.f_ec)

    @property
    def y0(self):
        """Vacuum yield: at least one dark count among the two detectors."""
        return self.epsilon_B * (2.0 - self.epsilon_B)


@dataclass(frozen=True)
class ObservedStats:
    q_signal: float
    q_decoy: float
    e_signal: float
    e_decoy: float

    def q(self, interval):
        return self.q_signal if interval == "signal" else self.q_decoy

    def e(self, interval):
        return self.e_signal if interval == "signal" else self.e_decoy


def eta_sys(ch: ChannelConfig):
    return ch.eta_B * 10.0 ** (-ch.alpha * ch.distance / 10.0)


def click_probabilities(n, m, ch: ChannelConfig, eta=None):
    """Outcome probabilities for the Fock input |n, m> (n in the correct arm).

    Returns ``(p_vac, p_det0, p_det1, p_dc)``: no click, only detector 0,
    only detector 1, both.
    """
    if n < 0 or m < 0:
        raise DomainError("photon numbers must be >= 0")
    eta = eta_sys(ch) if eta is None else eta
    e = ch.epsilon_B
    f_vac = (1.0 - eta) ** (n + m)
    f0 = (1.0 - (1.0 - eta) ** n) * (1.0 - eta) ** m
    f1 = (1.0 - (1.0 - eta) ** m) * (1.0 - eta) ** n
    p_vac = (1.0 - e * (2.0 - e)) * f_vac
    p0 = (1.0 - e) * e * f_vac + (1.0 - e) * f0
    p1 = (1.0 - e) * e * f_vac + (1.0 - e) * f1
    return p_vac, p0, p1, 1.0 - p_vac - p0 - p1


def _range(interval, src):
    if interval == "full":
        return 0.0, math.pi
    return interval_bounds(interval, theta_lambda(src))


def _scale(src, eta):
    # integrands below are O(eta * gamma); scaling the abs tolerance keeps it relative
    return max(eta * 4.0 * src.mu_t, 1e-300)


def _vacuum_deficit(interval, src, eta):
    """Interval mean of 1 - exp(-eta gamma(theta)) by adaptive quadrature."""
    a, b = _range(interval, src)
    z = 2.0 * src.mu_t * eta
    val, _ = integrate(lambda th: -math.expm1(-z * (1.0 + math.cos(th))), a, b,
                       abs_tol=1e-13 * _scale(src, eta) * (b - a))
    return val / (b - a)


def gain_numeric(interval, src: SourceConfig, ch: ChannelConfig):
    """Q^i = 1 - (1 - eps)^2 <exp(-eta_sys gamma)>_interval."""
    eta = eta_sys(ch)
    e = ch.epsilon_B
    return ch.y0 + (1.0 - e) ** 2 * _vacuum_deficit(interval, src, eta)


def gain_closed_form(interval, zeta, ch: ChannelConfig, theta_l=math.pi / 2):
    """Gain at theta_L = pi/2 from A_-(eta zeta) (signal) or A_+(eta zeta) (decoy)."""
    if abs(theta_l - math.pi / 2) > _HALF_PI_TOL:
        raise DomainError("closed-form gains hold only for theta_lambda = pi/2")
    x = eta_sys(ch) * zeta
    a = {"signal": a_minus, "decoy": a_plus}[interval](x)
    return 1.0 - (1.0 - ch.epsilon_B) ** 2 * a


def _combine(f0, f1, fdc, gain, e):
    return (e * (e - 1.0) * f0 + (2.0 + e * (e - 3.0)) * f1
            + (1.0 - e) ** 2 * fdc + e * (2.0 - e)) / (2.0 * gain)


def _psi_integrand_numeric(interval, src, eta, e, gain):
    a, b = _range(interval, src)
    z = 2.0 * src.mu_t * eta
    tol = 1e-13 * _scale(src, eta) * (b - a)

    def e_psi(psi):
        c = math.cos(psi)

        def body(th):
            x = z * (1.0 + math.cos(th))
            ca = 0.5 * x * (1.0 + c)
            cb = 0.5 * x * (1.0 - c)
            ex = math.exp(-x)
            f0 = ex * math.expm1(ca)
            f1 = ex * math.expm1(cb)
            fdc = math.expm1(-ca) * math.expm1(-cb)
            return e * (e - 1.0) * f0 + (2.0 + e * (e - 3.0)) * f1 + (1.0 - e) ** 2 * fdc

        val, _ = integrate(body, a, b, abs_tol=tol)
        return (val / (b - a) + e * (2.0 - e)) / (2.0 * gain)

    return e_psi


def qber_psi(interval, psi, src: SourceConfig, ch: ChannelConfig, method="adaptive"):
    """Error rate E_psi of interval pulses with polarization angle psi (H arc).

    ``method`` is "adaptive" (theta quadrature of the definitions) or
    "closed" (A_+/- forms, theta_L = pi/2 only).
    """
    eta = eta_sys(ch)
    e = ch.epsilon_B
    if method == "closed":
        _require_half_pi(src)
        z = 2.0 * src.mu_t
        gain = gain_closed_form(interval, z, ch)
        return _closed_psi(interval, z, eta, e, gain)(psi)
    gain = gain_numeric(interval, src, ch)
    return _psi_integrand_numeric(interval, src, eta, e, gain)(psi)


def _closed_psi(interval, z, eta, e, gain):
    a_fn = {"signal": a_minus, "decoy": a_plus}[interval]
    x = eta * z
    a_x = a_fn(x)

    def e_psi(psi):
        c = math.cos(psi)
        kap_p = x * (1.0 - (1.0 + c) / 2.0)
        kap_m = x * (1.0 - (1.0 - c) / 2.0)
        eps_p = x * (1.0 + c) / 2.0
        eps_m = x * (1.0 - c) / 2.0
        f0 = -a_x + a_fn(kap_p)
        f1 = -a_x + a_fn(kap_m)
        fdc = 1.0 + a_x - a_fn(eps_p) - a_fn(eps_m)
        return _combine(f0, f1, fdc, gain, e)

    return e_psi


def _require_half_pi(src):
    if abs(theta_lambda(src) - math.pi / 2) > _HALF_PI_TOL:
        raise DomainError("closed forms hold only for theta_lambda = pi/2")


def _acceptance_half_width(omega):
    if not 0.0 <= omega < math.pi / 4:
        raise DomainError(f"QBER needs omega in [0, pi/4) (got {omega})")
    return math.pi / 4 - omega


def qber_interval(interval, src: SourceConfig, ch: ChannelConfig, method="adaptive",
                  cross_check=False):
    """E^i: mean of E_psi over the accepted arc |psi| <= pi/4 - Omega.

    The arc [7 pi/4 + Omega, 2 pi) U [0, pi/4 - Omega] is symmetric about
    psi = 0 and E_psi is even in psi, so the mean over [0, pi/4 - Omega] is used.
    With ``cross_check`` (theta_L = pi/2 only) the closed-form route is
    evaluated too and a disagreement above 1e-8 raises ConsistencyError.
    """
    w = _acceptance_half_width(src.omega)
    eta = eta_sys(ch)
    e = ch.epsilon_B
    if method == "gauss":
        return _gauss_interval(interval, src, ch)[2]
    if method == "closed":
        _require_half_pi(src)
        z = 2.0 * src.mu_t
        fn = _closed_psi(interval, z, eta, e, gain_closed_form(interval, z, ch))
    elif method == "adaptive":
        fn = _psi_integrand_numeric(interval, src, eta, e, gain_numeric(interval, src, ch))
    else:
        raise DomainError(f"unknown method {method!r}")
    if w == 0.0:
        value = fn(0.0)
    else:
        value = integrate(fn, 0.0, w, abs_tol=1e-14 * w)[0] / w
    if cross_check and method != "closed":
        other = qber_interval(interval, src, ch, method="closed")
        if abs(other - value) > QBER_CONSISTENCY_TOL:
            raise ConsistencyError(
                f"QBER routes disagree for {interval}: numeric {value!r} vs closed {other!r}"
            )
    return value


_RULES = {}


def _rule(n):
    if n not in _RULES:
        _RULES[n] = GaussLegendre(n)
    return _RULES[n]


def gauss_moments(theta_range, zeta, eta, eps, omega, n_max=2,
                  theta_nodes=THETA_NODES, psi_nodes=PSI_NODES):
    """Photon statistics, gain and QBER of one interval on fixed Gauss rules.

    Returns ``(p, gain, qber)`` where ``p`` holds p_0..p_{n_max}.
    """
    th, wt = _rule(theta_nodes).nodes(*theta_range)
    half = math.pi / 4 - omega
    if half > 0:
        ps, wp = _rule(psi_nodes).nodes(0.0, half)
    else:
        ps, wp = np.zeros(1), np.ones(1)
    return kernels.interval_moments(
        np.ascontiguousarray(np.cos(th)), np.ascontiguousarray(wt),
        np.ascontiguousarray(np.cos(ps)), np.ascontiguousarray(wp),
        float(zeta), float(eta), float(eps), int(n_max),
    )


def _gauss_interval(interval, src, ch):
    return gauss_moments(_range(interval, src), 2.0 * src.mu_t, eta_sys(ch),
                         ch.epsilon_B, min(src.omega, math.pi / 4))


def gain(interval, src, ch, method="adaptive"):
    if method == "closed":
        _require_half_pi(src)
        return gain_closed_form(interval, 2.0 * src.mu_t, ch)
    if method == "gauss":
        return float(_gauss_interval(interval, src, ch)[1])
    return gain_numeric(interval, src, ch)


def observe(src: SourceConfig, ch: ChannelConfig, method="adaptive"):
    """Gains and QBERs of both intervals."""
    q = {i: gain(i, src, ch, method) for i in ("signal", "decoy")}
    e = {i: qber_interval(i, src, ch, method) for i in ("signal", "decoy")}
    return ObservedStats(q["signal"], q["decoy"], e["signal"], e["decoy"])


def poisson_psi_error(mean, psi, ch: ChannelConfig):
    """(gain, QBER) of a pure Poisson(mean) source at polarization angle psi.

    This is the single-intensity special case of the interval formulas and
    feeds the active-source baseline.
    """
    eta = eta_sys(ch)
    e = ch.epsilon_B
    x = eta * mean
    c = math.cos(psi)
    ca, cb = 0.5 * x * (1.0 + c), 0.5 * x * (1.0 - c)
    ex = math.exp(-x)
    f0 = ex * math.expm1(ca)
    f1 = ex * math.expm1(cb)
    fdc = math.expm1(-ca) * math.expm1(-cb)
    g = ch.y0 - (1.0 - e) ** 2 * math.expm1(-x)
    return g, _combine(f0, f1, fdc, g, e)
