# cython: language_level=3
"""Compiled hot loops: power series, fixed-node interval moments, Monte Carlo events.

Every function here has a drop-in twin in ``_fallback.py``; the two must
produce the same numbers (bit-identical for the Monte Carlo counts up to
last-ulp differences between libm and numpy transcendental functions).
"""

from libc.math cimport cos, exp, expm1, fabs, floor, sqrt, M_PI
from libc.stdint cimport uint64_t, int64_t

import numpy as np

DEF MAX_TERMS = 200
DEF EPS = 2.220446049250313e-16
DEF STRIDE = 4096
DEF FIRST_PHOTON_DRAW = 8

cdef double GAMMA_3_2 = 0.886226925452758014   # Gamma(3/2)
cdef double SQRT_PI = 1.772453850905516027


cdef inline double _gamma_half_int(int q) nogil:
    # Gamma(q + 3/2) for q in {-1, 0, 1, 2}
    if q == -1:
        return SQRT_PI
    elif q == 0:
        return GAMMA_3_2
    elif q == 1:
        return 1.5 * GAMMA_3_2
    return 3.75 * GAMMA_3_2


cdef inline double _factorial_small(int q) nogil:
    if q <= 1:
        return 1.0
    return 2.0


cdef (double, double, int) _bessel_i(int q, double z) nogil:
    cdef int k
    cdef double h = 0.5 * z
    cdef double h2 = h * h
    cdef double term, total, abs_sum, ratio, err
    if q == -1:
        q = 1
    term = 1.0
    for k in range(q):
        term *= h
    term /= _factorial_small(q)
    total = term
    abs_sum = fabs(term)
    k = 0
    if z == 0.0:
        return total, EPS * fabs(total), 1
    while k < MAX_TERMS:
        term *= h2 / ((k + 1.0) * (k + 1.0 + q))
        total += term
        abs_sum += fabs(term)
        k += 1
        if fabs(term) < 1e-16 * fabs(total):
            break
    ratio = h2 / ((k + 1.0) * (k + 1.0 + q))
    if ratio < 1.0:
        err = fabs(term) * ratio / (1.0 - ratio)
    else:
        err = fabs(term)
    return total, err + (k + 2) * EPS * abs_sum, k + 1


cdef (double, double, int) _struve_l(int q, double z) nogil:
    cdef int k
    cdef double h = 0.5 * z
    cdef double h2 = h * h
    cdef double term, total, abs_sum, ratio, err
    term = 1.0
    for k in range(q + 1):
        term *= h
    term /= GAMMA_3_2 * _gamma_half_int(q)
    total = term
    abs_sum = fabs(term)
    k = 0
    if z == 0.0:
        return total, EPS * fabs(total), 1
    while k < MAX_TERMS:
        term *= h2 / ((k + 1.5) * (k + q + 1.5))
        total += term
        abs_sum += fabs(term)
        k += 1
        if fabs(term) < 1e-16 * fabs(total):
            break
    ratio = h2 / ((k + 1.5) * (k + q + 1.5))
    if ratio < 1.0:
        err = fabs(term) * ratio / (1.0 - ratio)
    else:
        err = fabs(term)
    return total, err + (k + 2) * EPS * abs_sum, k + 1


def bessel_i_series(int q, double z):
    """Return ``(value, est_abs_error, n_terms)`` of I_q(z) by power series."""
    return _bessel_i(q, z)


def struve_l_series(int q, double z):
    """Return ``(value, est_abs_error, n_terms)`` of L_q(z) by power series."""
    return _struve_l(q, z)


def bessel_i_array(int q, double[::1] z):
    cdef Py_ssize_t i, n = z.shape[0]
    out = np.empty(n)
    cdef double[::1] o = out
    with nogil:
        for i in range(n):
            o[i] = _bessel_i(q, z[i])[0]
    return out


def struve_l_array(int q, double[::1] z):
    cdef Py_ssize_t i, n = z.shape[0]
    out = np.empty(n)
    cdef double[::1] o = out
    with nogil:
        for i in range(n):
            o[i] = _struve_l(q, z[i])[0]
    return out


def interval_moments(double[::1] cos_theta, double[::1] theta_weights,
                     double[::1] cos_psi, double[::1] psi_weights,
                     double zeta, double eta, double eps, int n_max):
    """Interval-averaged photon statistics, gain and QBER on fixed nodes.

    ``theta_weights`` and ``psi_weights`` must be normalized to sum to one.
    Returns ``(p, gain, qber)`` with ``p`` of length ``n_max + 1``.
    """
    cdef Py_ssize_t i, j, n
    cdef Py_ssize_t nt = cos_theta.shape[0], npsi = cos_psi.shape[0]
    cdef double gain
    cdef double g, w, x, term, qm = 0.0, f0, f1, fdc, a, b, ex, e_sum = 0.0
    cdef double y0 = eps * (2.0 - eps)
    cdef double one_m = (1.0 - eps) * (1.0 - eps)
    cdef double c0 = eps * (eps - 1.0)
    cdef double c1 = 2.0 + eps * (eps - 3.0)
    p = np.zeros(n_max + 1)
    cdef double[::1] pv = p
    with nogil:
        for i in range(nt):
            g = zeta * (1.0 + cos_theta[i])
            w = theta_weights[i]
            term = w * exp(-g)
            pv[0] += term
            for n in range(1, n_max + 1):
                term *= g / n
                pv[n] += term
            qm -= w * expm1(-eta * g)
        gain = y0 + one_m * qm
        for j in range(npsi):
            f0 = 0.0
            f1 = 0.0
            fdc = 0.0
            for i in range(nt):
                w = theta_weights[i]
                x = eta * zeta * (1.0 + cos_theta[i])
                a = 0.5 * x * (1.0 + cos_psi[j])
                b = 0.5 * x * (1.0 - cos_psi[j])
                ex = exp(-x)
                f0 += w * ex * expm1(a)
                f1 += w * ex * expm1(b)
                fdc += w * expm1(-a) * expm1(-b)
            e_sum += psi_weights[j] * (c0 * f0 + c1 * f1 + one_m * fdc + y0)
    return p, gain, e_sum / (2.0 * gain)


cdef inline uint64_t _mix(uint64_t z) nogil:
    z = (z ^ (z >> 30)) * <uint64_t>0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * <uint64_t>0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline double _uniform(uint64_t key, uint64_t counter) nogil:
    cdef uint64_t z = key + (counter + 1) * <uint64_t>0x9E3779B97F4A7C15ULL
    return (_mix(z) >> 11) * 1.1102230246251565e-16


def mc_events(uint64_t key, int64_t start, int64_t stop,
              double mu, double t, double lam, double omega,
              double eta, double eps, bint detect, int n_bins,
              int64_t[::1] counts):
    """Simulate events ``start..stop-1`` and add their tallies into ``counts``.

    Layout of ``counts``: ``[total, accepted]`` followed, per interval
    (signal then decoy), by ``[n, n_accepted, clicks, errors, hist[0..n_bins-1]]``.
    The last histogram bin collects every photon number ``>= n_bins - 1``.
    """
    cdef int64_t i
    cdef uint64_t base
    cdef double th1, th2, th3, th4, zeta, gam, psi, delta, half_width
    cdef double u, p, s, a_prob, cd
    cdef int k, kb, interval, off, ph
    cdef bint acc, hit_c, hit_w
    cdef double two_pi = 2.0 * M_PI
    cdef double quarter = 0.5 * M_PI
    half_width = 0.25 * M_PI - omega
    with nogil:
        for i in range(start, stop):
            base = <uint64_t>i * STRIDE
            th1 = two_pi * _uniform(key, base)
            th2 = two_pi * _uniform(key, base + 1)
            th3 = two_pi * _uniform(key, base + 2)
            th4 = two_pi * _uniform(key, base + 3)
            zeta = 2.0 * mu * (1.0 + cos(th2 - th1))
            gam = t * zeta
            interval = 0 if (1.0 - t) * zeta >= lam else 1
            psi = th4 - th3
            delta = psi - floor(psi / quarter + 0.5) * quarter
            acc = fabs(delta) < half_width

            u = _uniform(key, base + 4)
            p = exp(-gam)
            s = p
            k = 0
            while u > s and k < STRIDE - FIRST_PHOTON_DRAW:
                k += 1
                p *= gam / k
                s += p

            off = 2 + interval * (4 + n_bins)
            counts[0] += 1
            counts[off] += 1
            kb = k if k < n_bins - 1 else n_bins - 1
            counts[off + 4 + kb] += 1
            if not acc:
                continue
            counts[1] += 1
            counts[off + 1] += 1
            if not detect:
                continue
            cd = cos(delta)
            a_prob = eta * 0.5 * (1.0 + cd)
            hit_c = False
            hit_w = False
            for ph in range(k):
                u = _uniform(key, base + FIRST_PHOTON_DRAW + ph)
                if u < a_prob:
                    hit_c = True
                elif u < eta:
                    hit_w = True
            if _uniform(key, base + 5) < eps:
                hit_c = True
            if _uniform(key, base + 6) < eps:
                hit_w = True
            if hit_c or hit_w:
                counts[off + 2] += 1
                if hit_w and not hit_c:
                    counts[off + 3] += 1
                elif hit_w and hit_c and _uniform(key, base + 7) < 0.5:
                    counts[off + 3] += 1
