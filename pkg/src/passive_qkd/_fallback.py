"""Pure-Python/numpy twins of the compiled kernels in ``_kernels.pyx``."""

import math

import numpy as np

MAX_TERMS = 200
EPS = 2.220446049250313e-16
STRIDE = 4096
FIRST_PHOTON_DRAW = 8

_GAMMA_3_2 = 0.886226925452758014
_SQRT_PI = 1.772453850905516027
_GAMMA_HALF = {-1: _SQRT_PI, 0: _GAMMA_3_2, 1: 1.5 * _GAMMA_3_2, 2: 3.75 * _GAMMA_3_2}

_U64 = np.uint64
_GOLDEN = _U64(0x9E3779B97F4A7C15)
_M1 = _U64(0xBF58476D1CE4E5B9)
_M2 = _U64(0x94D049BB133111EB)


def _tail(term, ratio, k, abs_sum):
    err = abs(term) * ratio / (1.0 - ratio) if ratio < 1.0 else abs(term)
    return err + (k + 2) * EPS * abs_sum


def bessel_i_series(q, z):
    if q == -1:
        q = 1
    h = 0.5 * z
    h2 = h * h
    term = 1.0
    for _ in range(q):
        term *= h
    term /= 1.0 if q <= 1 else 2.0
    total = term
    abs_sum = abs(term)
    if z == 0.0:
        return total, EPS * abs(total), 1
    k = 0
    while k < MAX_TERMS:
        term *= h2 / ((k + 1.0) * (k + 1.0 + q))
        total += term
        abs_sum += abs(term)
        k += 1
        if abs(term) < 1e-16 * abs(total):
            break
    ratio = h2 / ((k + 1.0) * (k + 1.0 + q))
    return total, _tail(term, ratio, k, abs_sum), k + 1


def struve_l_series(q, z):
    h = 0.5 * z
    h2 = h * h
    term = 1.0
    for _ in range(q + 1):
        term *= h
    term /= _GAMMA_3_2 * _GAMMA_HALF[q]
    total = term
    abs_sum = abs(term)
    if z == 0.0:
        return total, EPS * abs(total), 1
    k = 0
    while k < MAX_TERMS:
        term *= h2 / ((k + 1.5) * (k + q + 1.5))
        total += term
        abs_sum += abs(term)
        k += 1
        if abs(term) < 1e-16 * abs(total):
            break
    ratio = h2 / ((k + 1.5) * (k + q + 1.5))
    return total, _tail(term, ratio, k, abs_sum), k + 1


def _series_array(z, first, ratio_fn):
    # vectorized over z; every lane stops on its own convergence criterion
    z = np.asarray(z, dtype=float)
    h2 = 0.25 * z * z
    term = first.copy()
    total = term.copy()
    live = z != 0.0
    for k in range(MAX_TERMS):
        if not live.any():
            break
        term = np.where(live, term * h2 / ratio_fn(k), term)
        total = np.where(live, total + term, total)
        live &= ~(np.abs(term) < 1e-16 * np.abs(total))
    return total


def bessel_i_array(q, z):
    if q == -1:
        q = 1
    z = np.asarray(z, dtype=float)
    first = (0.5 * z) ** q / (1.0 if q <= 1 else 2.0)
    return _series_array(z, first, lambda k: (k + 1.0) * (k + 1.0 + q))


def struve_l_array(q, z):
    z = np.asarray(z, dtype=float)
    first = (0.5 * z) ** (q + 1) / (_GAMMA_3_2 * _GAMMA_HALF[q])
    return _series_array(z, first, lambda k: (k + 1.5) * (k + q + 1.5))


def interval_moments(cos_theta, theta_weights, cos_psi, psi_weights, zeta, eta, eps, n_max):
    g = zeta * (1.0 + cos_theta)
    w = theta_weights
    term = w * np.exp(-g)
    p = np.empty(n_max + 1)
    p[0] = term.sum()
    for n in range(1, n_max + 1):
        term = term * g / n
        p[n] = term.sum()
    y0 = eps * (2.0 - eps)
    one_m = (1.0 - eps) ** 2
    gain = y0 + one_m * -(w * np.expm1(-eta * g)).sum()

    x = eta * zeta * (1.0 + cos_theta)[None, :]
    a = 0.5 * x * (1.0 + cos_psi)[:, None]
    b = 0.5 * x * (1.0 - cos_psi)[:, None]
    ex = np.exp(-x)
    f0 = (w * ex * np.expm1(a)).sum(axis=1)
    f1 = (w * ex * np.expm1(b)).sum(axis=1)
    fdc = (w * np.expm1(-a) * np.expm1(-b)).sum(axis=1)
    c0 = eps * (eps - 1.0)
    c1 = 2.0 + eps * (eps - 3.0)
    e_sum = (psi_weights * (c0 * f0 + c1 * f1 + one_m * fdc + y0)).sum()
    return p, gain, e_sum / (2.0 * gain)


def _mix(z):
    z = (z ^ (z >> _U64(30))) * _M1
    z = (z ^ (z >> _U64(27))) * _M2
    return z ^ (z >> _U64(31))


def uniforms(key, counters):
    """Counter-based SplitMix64 uniforms on [0, 1) for an array of counters."""
    with np.errstate(over="ignore"):
        z = _U64(key) + (counters + _U64(1)) * _GOLDEN
        return (_mix(z) >> _U64(11)).astype(float) * 1.1102230246251565e-16


def detector_hits(key, base, k, delta, eta, eps):
    """Per-detector click flags for photon numbers ``k`` at polarization offsets ``delta``.

    Returns boolean arrays ``(hit_correct, hit_wrong, coin)``; ``coin`` is the
    fair coin that settles double clicks.
    """
    a_prob = eta * 0.5 * (1.0 + np.cos(delta))
    hit_c = np.zeros(k.shape, dtype=bool)
    hit_w = np.zeros(k.shape, dtype=bool)
    kmax = int(k.max()) if k.size else 0
    for ph in range(kmax):
        live = k > ph
        u = uniforms(key, base[live] + _U64(FIRST_PHOTON_DRAW + ph))
        c = u < a_prob[live]
        hit_c[live] |= c
        hit_w[live] |= ~c & (u < eta)
    hit_c |= uniforms(key, base + _U64(5)) < eps
    hit_w |= uniforms(key, base + _U64(6)) < eps
    coin = uniforms(key, base + _U64(7)) < 0.5
    return hit_c, hit_w, coin


def detect_photons(key, base, k, delta, eta, eps):
    """Returns boolean arrays ``(clicked, error)``."""
    hit_c, hit_w, coin = detector_hits(key, base, k, delta, eta, eps)
    error = (hit_w & ~hit_c) | (hit_c & hit_w & coin)
    return hit_c | hit_w, error


def mc_events(key, start, stop, mu, t, lam, omega, eta, eps, detect, n_bins, counts,
              chunk=1 << 20):
    for lo in range(start, stop, chunk):
        _mc_chunk(key, lo, min(stop, lo + chunk), mu, t, lam, omega, eta, eps,
                  detect, n_bins, counts)


def _mc_chunk(key, start, stop, mu, t, lam, omega, eta, eps, detect, n_bins, counts):
    two_pi = 2.0 * math.pi
    quarter = 0.5 * math.pi
    base = np.arange(start, stop, dtype=np.uint64) * _U64(STRIDE)
    th1 = two_pi * uniforms(key, base)
    th2 = two_pi * uniforms(key, base + _U64(1))
    th3 = two_pi * uniforms(key, base + _U64(2))
    th4 = two_pi * uniforms(key, base + _U64(3))
    zeta = 2.0 * mu * (1.0 + np.cos(th2 - th1))
    gam = t * zeta
    interval = np.where((1.0 - t) * zeta >= lam, 0, 1)
    psi = th4 - th3
    delta = psi - np.floor(psi / quarter + 0.5) * quarter
    acc = np.abs(delta) < 0.25 * math.pi - omega

    u = uniforms(key, base + _U64(4))
    p = np.exp(-gam)
    s = p.copy()
    k = np.zeros(base.shape, dtype=np.int64)
    live = u > s
    while live.any():
        idx = np.nonzero(live)[0]
        k[idx] += 1
        p[idx] *= gam[idx] / k[idx]
        s[idx] += p[idx]
        live[idx] = (u[idx] > s[idx]) & (k[idx] < STRIDE - FIRST_PHOTON_DRAW)

    counts[0] += base.size
    counts[1] += int(acc.sum())
    kb = np.minimum(k, n_bins - 1)
    for i in (0, 1):
        off = 2 + i * (4 + n_bins)
        sel = interval == i
        counts[off] += int(sel.sum())
        counts[off + 1] += int((sel & acc).sum())
        counts[off + 4:off + 4 + n_bins] += np.bincount(kb[sel], minlength=n_bins)
        if detect:
            m = sel & acc
            clicked, error = detect_photons(key, base[m], k[m], delta[m], eta, eps)
            counts[off + 2] += int(clicked.sum())
            counts[off + 3] += int(error.sum())
