"""Decoy-state estimation from the two observed (gain, QBER) pairs.

Everything follows from the two linear relations

    Q^i     = sum_n p_n^i Y_n
    E^i Q^i = sum_n p_n^i Y_n e_n,      i in {signal, decoy},

with the background error rate e_0 fixed to 1/2. Eliminating the
higher-order terms between the two intervals gives lower bounds on Y_0 and
Y_1 and an upper bound on e_1. Each elimination divides by a 2x2
determinant of the photon-number statistics; the bounds are only valid
when the three determinants share one strict sign, which is checked.
"""

import logging
from dataclasses import dataclass

from .detection import ObservedStats
from .errors import EstimationError
from .photon_stats import PhotonStats

E0 = 0.5

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class DecoyBounds:
    y0_lower: float
    y0_upper: float
    y1_lower: float
    e1_upper: float
    combined_signal: float
    combined_decoy: float

    def combined(self, interval):
        return self.combined_signal if interval == "signal" else self.combined_decoy


def _det(stats, j, k):
    """p_j^d p_k^s - p_j^s p_k^d."""
    ps, pd = stats.p_signal, stats.p_decoy
    return pd[j] * ps[k] - ps[j] * pd[k]


def determinants(stats: PhotonStats):
    """The determinants (D10, D21, D20) used by the bounds."""
    return _det(stats, 1, 0), _det(stats, 2, 1), _det(stats, 2, 0)


def check_conditions(stats: PhotonStats):
    """Raise EstimationError unless the three determinants share a strict sign.

    A common sign is what the eliminations need; which sign depends only on
    which interval is labeled "signal", so the check is relabeling-invariant.
    """
    dets = determinants(stats)
    if all(d > 0 for d in dets) or all(d < 0 for d in dets):
        return dets
    raise EstimationError(
        "photon-number statistics of the two intervals do not separate: "
        f"D10={dets[0]:.3e}, D21={dets[1]:.3e}, D20={dets[2]:.3e}"
    )


def _nonzero(value, name):
    if value == 0.0:
        raise EstimationError(f"degenerate decoy statistics: {name} = 0")
    return value


def _clamp(value, lo, hi, name):
    if value < lo or value > hi:
        log.debug("clamping %s = %.6g to [%g, %g]", name, value, lo, hi)
        return min(max(value, lo), hi)
    return value


def y0_upper(stats: PhotonStats, obs: ObservedStats):
    ps0, pd0 = stats.p_signal[0], stats.p_decoy[0]
    if ps0 <= 0.0 or pd0 <= 0.0:
        raise EstimationError("vacuum probabilities must be positive")
    return min(obs.e_decoy * obs.q_decoy / (pd0 * E0), obs.e_signal * obs.q_signal / (ps0 * E0), 1.0)


def y0_lower(stats: PhotonStats, obs: ObservedStats):
    ps, pd = stats.p_signal, stats.p_decoy
    den = _nonzero(_det(stats, 1, 0), "p1d p0s - p1s p0d")
    return max((pd[1] * obs.q_signal - ps[1] * obs.q_decoy) / den, 0.0)


def y1_lower(stats: PhotonStats, obs: ObservedStats, y0u=None):
    ps, pd = stats.p_signal, stats.p_decoy
    y0u = y0_upper(stats, obs) if y0u is None else y0u
    den = _nonzero(_det(stats, 2, 1), "p2d p1s - p2s p1d")
    num = pd[2] * obs.q_signal - ps[2] * obs.q_decoy - _det(stats, 2, 0) * y0u
    return _clamp(max(num / den, 0.0), 0.0, 1.0, "Y1_L")


def e1_upper(stats: PhotonStats, obs: ObservedStats, y0l, y1l):
    """Smallest of the three single-photon error estimators, clamped to [0, 1]."""
    if not y1l > 0.0:
        raise EstimationError("Y1 lower bound is zero; single photons carry no key")
    ps, pd = stats.p_signal, stats.p_decoy
    eq_s = obs.e_signal * obs.q_signal
    eq_d = obs.e_decoy * obs.q_decoy
    cands = [
        (eq_d - pd[0] * y0l * E0) / (pd[1] * y1l),
        (eq_s - ps[0] * y0l * E0) / (ps[1] * y1l),
    ]
    den = _det(stats, 1, 0)
    if den != 0.0:
        cands.append((ps[0] * eq_d - pd[0] * eq_s) / (den * y1l))
    return _clamp(min(cands), 0.0, 1.0, "e1_U")


def combined_lower(interval, stats: PhotonStats, obs: ObservedStats, y0u):
    """Lower bound on p_1^i Y_1 + p_0^i Y_0 for one interval."""
    ps, pd = stats.p_signal, stats.p_decoy
    p = stats.p(interval)
    den = _nonzero(_det(stats, 2, 1), "p2d p1s - p2s p1d")
    val = p[1] * (pd[2] * obs.q_signal - ps[2] * obs.q_decoy) / den + (p[0] - p[1] * _det(stats, 2, 0) / den) * y0u
    return max(val, 0.0)


def estimate_bounds(stats: PhotonStats, obs: ObservedStats, check=True):
    """All decoy bounds. With Y1_L = 0 the single-photon error is set to 1/2."""
    if check:
        check_conditions(stats)
    y0u = y0_upper(stats, obs)
    y0l = min(y0_lower(stats, obs), 1.0)
    y1l = y1_lower(stats, obs, y0u)
    e1u = e1_upper(stats, obs, y0l, y1l) if y1l > 0.0 else 0.5
    return DecoyBounds(
        y0_lower=y0l,
        y0_upper=y0u,
        y1_lower=y1l,
        e1_upper=e1u,
        combined_signal=combined_lower("signal", stats, obs, y0u),
        combined_decoy=combined_lower("decoy", stats, obs, y0u),
    )
