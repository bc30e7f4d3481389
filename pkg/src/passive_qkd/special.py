"""Modified Bessel and modified Struve functions of small integer order.

Only the orders that appear in the phase-averaged closed forms are
supported, and only on ``0 <= z <= 20``. Both functions are summed from
their power series:

    I_q(z) = sum_k (z/2)^(2k+q) / (k! Gamma(k+q+1))
    L_q(z) = sum_k (z/2)^(2k+q+1) / (Gamma(k+3/2) Gamma(k+q+3/2))

with I_{-1} = I_1.
"""

from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .errors import DomainError

ORDERS = (-1, 0, 1, 2)
Z_MAX = 20.0


@dataclass(frozen=True)
class SpecialFnResult:
    value: float
    est_abs_error: float
    n_terms: int = 0


def _check(q, z):
    if q not in ORDERS:
        raise DomainError(f"order {q!r} not supported; expected one of {ORDERS}")
    zf = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(zf)) or np.any(zf < 0.0) or np.any(zf > Z_MAX):
        raise DomainError(f"argument outside [0, {Z_MAX}]: {z!r}")
    return zf


def bessel_i_result(q, z):
    _check(q, z)
    return SpecialFnResult(*kernels.bessel_i_series(int(q), float(z)))


def struve_l_result(q, z):
    _check(q, z)
    return SpecialFnResult(*kernels.struve_l_series(int(q), float(z)))


def bessel_i(q, z):
    """Modified Bessel function of the first kind I_q(z).

    Accepts a scalar or an array for ``z``; arrays are evaluated elementwise.
    """
    zf = _check(q, z)
    if zf.ndim == 0:
        return kernels.bessel_i_series(int(q), float(zf))[0]
    flat = np.ascontiguousarray(zf.ravel())
    return kernels.bessel_i_array(int(q), flat).reshape(zf.shape)


def struve_l(q, z):
    """Modified Struve function L_q(z); scalar or elementwise over an array."""
    zf = _check(q, z)
    if zf.ndim == 0:
        return kernels.struve_l_series(int(q), float(zf))[0]
    flat = np.ascontiguousarray(zf.ravel())
    return kernels.struve_l_array(int(q), flat).reshape(zf.shape)


def a_plus_minus(sign, x):
    """A_+(x) = e^-x [I_0(x) + L_0(x)] or A_-(x) = e^-x [I_0(x) - L_0(x)].

    Equivalently A_-(x) is the mean of exp(-x(1 + cos t)) over t in [0, pi/2]
    and A_+(x) the same mean over [pi/2, pi].
    """
    if sign in ("+", +1):
        s = 1.0
    elif sign in ("-", -1):
        s = -1.0
    else:
        raise DomainError(f"sign must be '+' or '-', got {sign!r}")
    value = np.exp(-np.asarray(x, dtype=float)) * (bessel_i(0, x) + s * struve_l(0, x))
    return value if np.ndim(value) else float(value)


def a_plus(x):
    return a_plus_minus("+", x)


def a_minus(x):
    return a_plus_minus("-", x)
