"""Parameter optimization, distance sweeps and cutoff search.

Each optimization is a coarse grid scan followed by a bounded Nelder-Mead
refinement. Both stages are deterministic, so repeated runs are
bit-identical. Where no grid point yields key, the objective falls back to
the best (negative) per-interval rate so that the simplex still has a
slope to follow.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import optimize as sopt

from .detection import ChannelConfig
from .errors import DomainError, EstimationError, NumericalError
from .key_rate import active_infinite_decoy_rate, asymptotic_passive_rate, passive_rate
from .source import SourceConfig

VARIANTS = ("passive2", "passive_inf", "active_inf")
RATE_FLOOR = 1e-15
MU_T_BOX = (1e-6, 1.0)
OMEGA_BOX = (0.0, math.pi / 4 - 1e-9)
THETA_BOX = (1e-3, math.pi - 1e-3)
MU_ACTIVE_BOX = (1e-6, 5.0)
_PENALTY = -1.0


@dataclass(frozen=True)
class OptimizerOptions:
    variant: str = "passive2"
    grid_mu_t: int = 40
    grid_omega: int = 40
    grid_theta: int = 13
    optimize_lambda: bool = False
    theta_lambda: float = math.pi / 2
    t: float = 0.01
    xatol: float = 1e-4
    fatol: float = 1e-12
    max_iter: int = 500
    method: str = "gauss"

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise DomainError(f"variant must be one of {VARIANTS} (got {self.variant!r})")
        if self.grid_mu_t < 2 or self.grid_omega < 2:
            raise DomainError("grid sizes must be >= 2")


@dataclass(frozen=True)
class OptimizationResult:
    best_mu_t: float
    best_omega: float
    best_theta_lambda: float
    best_rate: float
    evaluations: int
    converged: bool
    distance: float = 0.0
    detail: object = field(default=None, compare=False, repr=False)


class _Objective:
    """Rate as a function of the free parameter vector, with an evaluation count."""

    def __init__(self, ch, opts):
        self.ch = ch
        self.opts = opts
        self.count = 0

    def names(self):
        if self.opts.variant == "active_inf":
            return ("mu",)
        if self.opts.variant == "passive2" and self.opts.optimize_lambda:
            return ("mu_t", "omega", "theta_lambda")
        return ("mu_t", "omega")

    def box(self):
        table = {"mu": MU_ACTIVE_BOX, "mu_t": MU_T_BOX, "omega": OMEGA_BOX, "theta_lambda": THETA_BOX}
        return [table[n] for n in self.names()]

    def inside(self, x):
        return all(lo <= v <= hi for v, (lo, hi) in zip(x, self.box()))

    def full(self, x):
        """Return ``(rate, guidance)``; guidance is positive rate or a negative slope."""
        self.count += 1
        if not self.inside(x):
            return 0.0, _PENALTY
        v = self.opts.variant
        if v == "active_inf":
            r = active_infinite_decoy_rate(x[0], self.ch)
            return max(r, 0.0), r
        if v == "passive_inf":
            r = asymptotic_passive_rate(2.0 * x[0], x[1], self.ch)
            return max(r, 0.0), r
        th = x[2] if len(x) > 2 else self.opts.theta_lambda
        src = SourceConfig.from_mu_t(x[0], x[1], th, self.opts.t)
        try:
            res = passive_rate(src, self.ch, method=self.opts.method)
        except EstimationError:
            return 0.0, _PENALTY
        if res.rate_total > 0.0:
            return res.rate_total, res.rate_total
        return 0.0, res.best_partial()

    def guidance(self, x):
        return self.full(x)[1]


def _grid(opts):
    mu_t = np.linspace(MU_T_BOX[1] / opts.grid_mu_t, MU_T_BOX[1], opts.grid_mu_t)
    om = np.linspace(0.0, math.pi / 4, opts.grid_omega + 1)[:-1]
    if opts.variant == "active_inf":
        return [(m,) for m in np.linspace(MU_ACTIVE_BOX[1] / 100, 2.0, opts.grid_mu_t)]
    if opts.variant == "passive2" and opts.optimize_lambda:
        th = np.linspace(0.0, math.pi, opts.grid_theta + 2)[1:-1]
        return [(m, o, t) for t in th for m in mu_t for o in om]
    return [(m, o) for m in mu_t for o in om]


def _refine(obj, x0, scale, opts):
    # the rate spans many decades over distance; scale so fatol is relative
    s = abs(scale) if scale != 0 else 1.0
    res = sopt.minimize(
        lambda x: -obj.guidance(x) / s,
        np.asarray(x0, dtype=float),
        method="Nelder-Mead",
        bounds=obj.box(),
        options={"xatol": opts.xatol, "fatol": opts.fatol, "maxiter": opts.max_iter, "maxfev": 4 * opts.max_iter},
    )
    x = np.clip(res.x, [b[0] for b in obj.box()], [b[1] for b in obj.box()])
    return tuple(float(v) for v in x), bool(res.success)


def _result(obj, x, converged, distance, opts):
    rate, _ = obj.full(x)
    if not math.isfinite(rate):
        raise NumericalError(f"non-finite rate at {x}")
    names = obj.names()
    vals = dict(zip(names, x))
    if opts.variant == "active_inf":
        mu_t, omega, th = vals["mu"], math.pi / 4, float("nan")
    else:
        mu_t, omega = vals["mu_t"], vals["omega"]
        th = vals.get("theta_lambda", opts.theta_lambda if opts.variant == "passive2" else math.pi)
    return OptimizationResult(mu_t, omega, th, rate, obj.count, converged, distance)


def optimize_at_distance(d, ch: ChannelConfig, options=None, warm_start=None):
    """Maximize the rate of ``options.variant`` at distance ``d`` (km).

    ``warm_start`` is an optional parameter tuple refined as a second start;
    the better of the grid-started and warm-started refinements is returned.
    For the active variant ``best_mu_t`` holds the mean photon number mu.
    """
    opts = options or OptimizerOptions()
    if not d >= 0:
        raise DomainError(f"distance must be >= 0 (got {d})")
    obj = _Objective(ch.at(d), opts)
    scored = [(obj.guidance(x), x) for x in _grid(opts)]
    best_val, best_x = max(scored, key=lambda s: s[0])
    starts = [best_x]
    if warm_start is not None and obj.inside(warm_start) and tuple(warm_start) != tuple(best_x):
        starts.append(tuple(warm_start))
    candidates = []
    for x0 in starts:
        x, ok = _refine(obj, x0, best_val, opts)
        candidates.append((obj.guidance(x), x, ok))
    # never report below the best probed grid value
    candidates.append((best_val, best_x, False))
    val, x, ok = max(candidates, key=lambda c: c[0])
    converged = any(c[2] for c in candidates[:-1])
    return _result(obj, x, converged, d, opts)


def _params(result, opts):
    if opts.variant == "active_inf":
        return (result.best_mu_t,)
    if opts.variant == "passive2" and opts.optimize_lambda:
        return (result.best_mu_t, result.best_omega, result.best_theta_lambda)
    return (result.best_mu_t, result.best_omega)


def distance_sweep(d_grid, ch: ChannelConfig, options=None):
    """Optimize at each distance, warm-starting from the previous optimum."""
    opts = options or OptimizerOptions()
    grid = list(d_grid)
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise DomainError("distance grid must be sorted")
    out = []
    warm = None
    for d in grid:
        res = optimize_at_distance(d, ch, opts, warm_start=warm)
        out.append((d, res))
        if res.best_rate > RATE_FLOOR:
            warm = _params(res, opts)
    return out


def find_cutoff(ch: ChannelConfig, options=None, step=5.0, d_max=400.0, tol=0.5):
    """Largest distance with optimized rate above 1e-15, to within ``tol`` km.

    Distances are scanned in ``step`` km increments until the rate vanishes;
    the last bracket is then bisected.
    """
    opts = options or OptimizerOptions()
    first = optimize_at_distance(0.0, ch, opts)
    if not first.best_rate > RATE_FLOOR:
        raise NumericalError("no positive key rate at zero distance")
    lo, warm = 0.0, _params(first, opts)
    hi = None
    d = step
    while d <= d_max:
        res = optimize_at_distance(d, ch, opts, warm_start=warm)
        if res.best_rate > RATE_FLOOR:
            lo, warm = d, _params(res, opts)
            d += step
        else:
            hi = d
            break
    if hi is None:
        raise NumericalError(f"rate still positive at {d_max} km")
    while hi - lo > 2.0 * tol:
        mid = 0.5 * (lo + hi)
        res = optimize_at_distance(mid, ch, opts, warm_start=warm)
        if res.best_rate > RATE_FLOOR:
            lo, warm = mid, _params(res, opts)
        else:
            hi = mid
    return 0.5 * (lo + hi)


def with_variant(options, variant):
    return replace(options or OptimizerOptions(), variant=variant)
