"""Numerical integration helpers.

``integrate`` is the definition-level route: adaptive Gauss-Kronrod with
interval bisection (QUADPACK's QAGS via scipy), converted into an exception
when the requested accuracy is not reached. ``GaussLegendre`` is the fixed
rule used on the optimizer's hot path; every integrand here is analytic on
a bounded interval, so a few dozen nodes reach double precision.
"""

import warnings
from functools import lru_cache

import numpy as np
from scipy import integrate as _sp_integrate

from .errors import QuadratureError

ABS_TOL = 1e-12
REL_TOL = 1e-10


def integrate(fn, a, b, abs_tol=ABS_TOL, rel_tol=REL_TOL, limit=200):
    """Return ``(value, abs_error)`` of the integral of ``fn`` over [a, b].

    Raises QuadratureError (carrying the achieved error estimate) when the
    adaptive scheme stops short of ``max(abs_tol, rel_tol * |value|)``.
    """
    if a == b:
        return 0.0, 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", _sp_integrate.IntegrationWarning)
        value, err = _sp_integrate.quad(
            fn, a, b, epsabs=abs_tol, epsrel=rel_tol, limit=limit, full_output=1
        )[:2]
    # QUADPACK flags round-off even when the target was met; judge by the estimate
    if not np.isfinite(value) or err > max(abs_tol, rel_tol * abs(value)):
        raise QuadratureError(f"adaptive quadrature on [{a}, {b}] did not converge", err)
    return value, err


def mean_over(fn, a, b, **kw):
    """Average of ``fn`` over [a, b] by adaptive quadrature."""
    value, _ = integrate(fn, a, b, **kw)
    return value / (b - a)


@lru_cache(maxsize=None)
def _legendre(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


class GaussLegendre:
    """Fixed ``n``-point Gauss-Legendre rule with weights normalized to a mean."""

    def __init__(self, n=48):
        self.n = n
        self._x, self._w = _legendre(n)

    def nodes(self, a, b):
        """Nodes on [a, b] and weights summing to one."""
        x = 0.5 * (b - a) * self._x + 0.5 * (a + b)
        return x, 0.5 * self._w

    def mean(self, fn, a, b):
        x, w = self.nodes(a, b)
        return float(np.dot(w, fn(x)))

