import math

import pytest
from hypothesis import given, strategies as st

from passive_qkd.decoy import (
    check_conditions,
    combined_lower,
    determinants,
    e1_upper,
    estimate_bounds,
    y0_lower,
    y0_upper,
    y1_lower,
)
from passive_qkd.detection import ChannelConfig, ObservedStats, observe
from passive_qkd.errors import EstimationError
from passive_qkd.key_rate import true_e1, yield_n
from passive_qkd.photon_stats import PhotonStats, build_stats
from passive_qkd.source import SourceConfig


def _setup(m=0.175, omega=0.393, d=100.0, th=math.pi / 2, **ch_kw):
    src = SourceConfig.from_mu_t(m, omega, th)
    ch = ChannelConfig(distance=d, **ch_kw)
    return build_stats(src, n_max=2, method="gauss"), observe(src, ch, "gauss"), ch


def _swap(stats, obs):
    s = PhotonStats(stats.p_decoy, stats.p_signal, stats.n_max, stats.tail_bound, stats.p_d, stats.p_s)
    o = ObservedStats(obs.q_decoy, obs.q_signal, obs.e_decoy, obs.e_signal)
    return s, o


def test_y0_upper_examples():
    stats, obs, _ = _setup()
    assert y0_upper(stats, ObservedStats(obs.q_signal, obs.q_decoy, 0.0, 0.0)) == 0.0
    assert y0_upper(stats, ObservedStats(1.0, 1.0, 0.5, 0.5)) == 1.0
    assert y0_upper(stats, obs) >= 3.2e-7 * (2 - 3.2e-7)


def test_y0_lower_degenerate():
    stats = PhotonStats((0.6, 0.3, 0.1), (0.6, 0.3, 0.1), 2, 0.0, 0.5, 0.5)
    obs = ObservedStats(0.01, 0.01, 0.02, 0.02)
    with pytest.raises(EstimationError):
        y0_lower(stats, obs)
    with pytest.raises(EstimationError):
        y1_lower(stats, obs)
    with pytest.raises(EstimationError):
        check_conditions(stats)
    with pytest.raises(EstimationError):
        combined_lower("signal", stats, obs, 1e-6)


def test_vacuum_like_source_clamps():
    stats, obs, ch = _setup(m=1e-7)
    b = estimate_bounds(stats, obs)
    assert b.y0_lower >= 0.0
    assert 0.0 <= b.y1_lower <= yield_n(1, ch)
    # nearly all pulses are vacuum, so the combined bound is the vacuum term
    for interval in ("signal", "decoy"):
        assert b.combined(interval) == pytest.approx(stats.p(interval)[0] * b.y0_upper, rel=1e-3)
    # bound with no usable single-photon statistics: Y1_L clamps to 0 and e1 to 1/2
    flat = ObservedStats(obs.q_signal, 0.0, obs.e_signal, obs.e_decoy)
    b = estimate_bounds(stats, flat)
    assert b.y1_lower == 0.0 and b.e1_upper == 0.5


def test_y1_lower_bracket_at_50km():
    stats, obs, ch = _setup(d=50.0)
    assert 0.0 < y1_lower(stats, obs) <= yield_n(1, ch)


def test_e1_upper_requires_positive_y1():
    stats, obs, _ = _setup()
    with pytest.raises(EstimationError):
        e1_upper(stats, obs, 0.0, 0.0)


def test_e1_upper_clamped_at_zero():
    stats, obs, _ = _setup()
    assert e1_upper(stats, ObservedStats(obs.q_signal, obs.q_decoy, 0.0, 0.0), 1e-3, 1e-3) == 0.0


def test_e1_upper_vanishes_for_ideal_channel():
    prev = 1.0
    for omega in (0.3, 0.6, 0.75, 0.78, 0.785):
        stats, obs, _ = _setup(omega=omega, d=0.0, epsilon_B=0.0)
        e = estimate_bounds(stats, obs).e1_upper
        assert e < prev
        prev = e
    assert prev < 1e-7


def test_perfect_detector_y1_gap():
    gaps = []
    for th in (1.2, math.pi / 2, 2.0):
        stats, obs, ch = _setup(th=th, d=0.0, eta_B=1.0, epsilon_B=0.0)
        y1l = estimate_bounds(stats, obs).y1_lower
        assert y1l <= 1.0
        gaps.append(1.0 - y1l)
    assert all(g >= 0 for g in gaps)


def test_determinants_negative_with_bright_signal():
    stats, _, _ = _setup()
    dets = determinants(stats)
    assert all(d < 0 for d in dets)
    assert check_conditions(stats) == dets


@given(st.floats(0.02, 0.6), st.floats(0.0, 0.75), st.sampled_from(range(0, 185, 5)))
def test_bracketing(m, omega, d):
    stats, obs, ch = _setup(m, omega, float(d))
    b = estimate_bounds(stats, obs)
    y0 = ch.y0
    assert b.y0_lower <= y0 * (1 + 1e-9) and y0 <= b.y0_upper * (1 + 1e-9)
    assert b.y1_lower <= yield_n(1, ch) * (1 + 1e-9)
    if b.y1_lower > 0:
        assert b.e1_upper >= true_e1(omega, ch) * (1 - 1e-9)
    for interval in ("signal", "decoy"):
        p = stats.p(interval)
        assert b.combined(interval) <= (p[1] * yield_n(1, ch) + p[0] * y0) * (1 + 1e-9)
    assert 0 <= b.y0_lower <= b.y0_upper <= 1
    assert 0 <= b.y1_lower <= 1 and 0 <= b.e1_upper <= 1


@given(st.floats(0.02, 0.6), st.floats(0.0, 0.75), st.floats(0.0, 180.0), st.floats(0.3, 2.8))
def test_relabeling_invariance(m, omega, d, th):
    stats, obs, _ = _setup(m, omega, d, th)
    a = estimate_bounds(stats, obs)
    b = estimate_bounds(*_swap(stats, obs))
    for x, y in ((a.y0_upper, b.y0_upper), (a.y0_lower, b.y0_lower), (a.y1_lower, b.y1_lower),
                 (a.e1_upper, b.e1_upper), (a.combined_signal, b.combined_decoy),
                 (a.combined_decoy, b.combined_signal)):
        assert x == pytest.approx(y, rel=1e-9, abs=1e-15)
