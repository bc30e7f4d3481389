import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from passive_qkd.errors import DomainError
from passive_qkd.photon_stats import (
    build_stats,
    gauss_pn,
    interval_bounds,
    p_acc,
    pn_closed_form,
    pn_numeric,
    poisson_pmf,
    tail_bound,
)
from passive_qkd.source import SourceConfig

from oracles import pn_simpson

# composite Simpson, 1e5 panels, mu t = 0.175 at theta_L = pi/2
P3_SIGNAL = 0.0185754648807458
P3_DECOY = 0.0008999522512251874
ZETAS = (0.1, 0.35, 0.7)

mu_t = st.floats(1e-4, 1.0)
theta = st.floats(0.05, math.pi - 0.05)


def test_p3_against_simpson(ref_source):
    assert pn_numeric(3, "signal", ref_source) == pytest.approx(P3_SIGNAL, abs=1e-12)
    assert pn_numeric(3, "decoy", ref_source) == pytest.approx(P3_DECOY, abs=1e-12)


def test_vanishing_intensity():
    cfg = SourceConfig.from_mu_t(1e-300, 0.2)
    for interval in ("signal", "decoy"):
        assert pn_numeric(0, interval, cfg) == 1.0
    stats = build_stats(cfg)
    assert stats.p_signal[0] == 1.0 and stats.p_decoy[0] == 1.0


def test_closed_form_trivial():
    assert pn_closed_form(0, "signal", 0.0) == 1.0
    assert pn_closed_form(1, "decoy", 0.0) == 0.0


@pytest.mark.parametrize("z", ZETAS)
@pytest.mark.parametrize("interval", ["signal", "decoy"])
@pytest.mark.parametrize("n", [0, 1, 2])
def test_closed_form_matches_quadrature(n, interval, z):
    cfg = SourceConfig.from_mu_t(z / 2, 0.3)
    assert pn_closed_form(n, interval, z) == pytest.approx(pn_numeric(n, interval, cfg), abs=1e-10)
    a, b = interval_bounds(interval, math.pi / 2)
    assert pn_closed_form(n, interval, z) == pytest.approx(pn_simpson(n, z, a, b), abs=1e-12)


def test_closed_form_rejects_other_threshold():
    with pytest.raises(DomainError):
        pn_closed_form(0, "signal", 0.35, theta_l=1.0)
    with pytest.raises(DomainError):
        pn_closed_form(3, "signal", 0.35)
    with pytest.raises(DomainError):
        pn_closed_form(0, "both", 0.35)


def test_p_acc():
    assert p_acc(0.0) == 1.0
    assert p_acc(math.pi / 4) == 0.0
    assert p_acc(0.393) == pytest.approx(0.4996, abs=1e-4)
    with pytest.raises(DomainError):
        p_acc(0.8)


def test_normalization_default(ref_source):
    stats = build_stats(ref_source, n_max=12)
    for p in (stats.p_signal, stats.p_decoy):
        assert sum(p) >= 1 - 1e-12
        assert sum(p) <= 1 + 1e-12
    assert stats.p_s == pytest.approx(0.5) and stats.p_d == pytest.approx(0.5)


def test_build_stats_methods_agree(ref_source):
    auto = build_stats(ref_source, n_max=6)
    adaptive = build_stats(ref_source, n_max=6, method="adaptive")
    gauss = build_stats(ref_source, n_max=6, method="gauss")
    for other in (adaptive, gauss):
        assert np.allclose(auto.p_signal, other.p_signal, atol=1e-12, rtol=0)
        assert np.allclose(auto.p_decoy, other.p_decoy, atol=1e-12, rtol=0)


def test_build_stats_rejects_small_nmax(ref_source):
    with pytest.raises(DomainError):
        build_stats(ref_source, n_max=1)


def test_poisson_pmf_zero_mean():
    assert poisson_pmf(0, 0.0) == 1.0
    assert poisson_pmf(2, 0.0) == 0.0


@given(mu_t, theta)
def test_normalization_property(m, th):
    cfg = SourceConfig.from_mu_t(m, 0.2, th)
    stats = build_stats(cfg, n_max=12, method="gauss")
    for p in (stats.p_signal, stats.p_decoy):
        assert all(0.0 <= v <= 1.0 for v in p)
        assert sum(p) <= 1 + 1e-12
        assert sum(p) + stats.tail_bound >= 1 - 1e-12
    assert stats.p_s == pytest.approx(th / math.pi, rel=1e-12)
    assert stats.p_s + stats.p_d == pytest.approx(1.0)


@given(mu_t)
def test_decoy_has_more_vacuum(m):
    stats = build_stats(SourceConfig.from_mu_t(m, 0.2), n_max=2)
    assert stats.p_decoy[0] > stats.p_signal[0]


@given(mu_t, theta)
def test_mean_identity(m, th):
    cfg = SourceConfig.from_mu_t(m, 0.2, th)
    z = 2 * m
    for interval in ("signal", "decoy"):
        a, b = interval_bounds(interval, th)
        p = gauss_pn((a, b), z, 40)
        mean_gamma = z * (1 + (math.sin(b) - math.sin(a)) / (b - a))
        assert sum(n * pn for n, pn in enumerate(p)) == pytest.approx(mean_gamma, abs=1e-10)
        assert pn_numeric(1, interval, cfg) == pytest.approx(p[1], abs=1e-12)


def test_tail_bound_is_an_upper_bound(ref_source):
    stats = build_stats(ref_source, n_max=3)
    for p in (stats.p_signal, stats.p_decoy):
        assert 1.0 - sum(p) <= stats.tail_bound + 1e-15
    assert tail_bound(0.175, 12) < 1e-12
