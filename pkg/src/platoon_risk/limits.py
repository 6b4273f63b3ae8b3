"""Delay-induced bounds on the kernel, the covariance, and the risk.

Over the compact region of mode pairs (s2 in [0.1, 0.9], s1 from 0.1 up
to s*(s2) sin s*(s2) - 0.1 with s* cot s* = s2) the variance kernel is
bounded, which bounds every covariance entry of any platoon whose modes
stay inside the region, and in turn bounds the best risk any
communication graph can achieve.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .gaussian import kappa
from .kernel import f_kernel
from .params import PlatoonParams
from .risk import RiskValue, levelset_risk
from .stability import SBAR_S2_HI, SBAR_S2_LO, sbar_contains, sbar_s1_max

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_DEFAULT_GRID = (200, 200)
_GRID_KERNEL_TOL = 1e-7
_REFINE_KERNEL_TOL = 1e-9

_bounds_cache: dict = {}
_bounds_lock = threading.Lock()


@dataclass(frozen=True)
class FBounds:
    """Extrema of the variance kernel over the compact mode region."""

    f_low: float
    f_high: float
    argmin: tuple[float, float]
    argmax: tuple[float, float]

    def to_dict(self) -> dict:
        return {
            "f_low": self.f_low,
            "f_high": self.f_high,
            "argmin": list(self.argmin),
            "argmax": list(self.argmax),
        }


def _golden_line(objective, lo: float, hi: float, iters: int = 40) -> tuple[float, float]:
    """Golden-section minimization on [lo, hi]; returns (x, objective(x))."""
    a, b = lo, hi
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = objective(x1), objective(x2)
    for _ in range(iters):
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = objective(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = objective(x2)
    return (x1, f1) if f1 <= f2 else (x2, f2)


def _refine(point: tuple[float, float], step: tuple[float, float], sign: float) -> tuple[float, tuple[float, float]]:
    """Coordinate descent from a grid cell: golden-section along s1 then s2,
    three rounds, staying inside the compact region."""

    def val(s1: float, s2: float) -> float:
        return sign * f_kernel(s1, s2, _REFINE_KERNEL_TOL).value

    s1, s2 = point
    d1, d2 = step
    for _ in range(3):
        hi1 = sbar_s1_max(s2)
        lo = max(SBAR_S2_LO, s1 - d1)
        hi = min(hi1, s1 + d1)
        s1, _ = _golden_line(lambda x: val(x, s2), lo, hi)

        lo2 = max(SBAR_S2_LO, s2 - d2)
        hi2 = min(SBAR_S2_HI, s2 + d2)

        def along_s2(x: float) -> float:
            return val(min(s1, sbar_s1_max(x)), x)

        s2, _ = _golden_line(along_s2, lo2, hi2)
        s1 = min(s1, sbar_s1_max(s2))
        d1 /= 4.0
        d2 /= 4.0
    return val(s1, s2) * sign, (s1, s2)


def f_bounds(
    grid: tuple[int, int] = _DEFAULT_GRID, refine_tol: float = 1e-6
) -> FBounds:
    """Infimum and supremum of the kernel over the compact region.

    A dense feasible grid (``grid[0]`` s2 rows by ``grid[1]`` s1 points
    per row) is scanned, then each extremum is polished by coordinate
    descent.  ``refine_tol`` only keys the cache granularity; the
    polish runs a fixed golden-section schedule well below it.
    """
    key = (grid, refine_tol)
    with _bounds_lock:
        hit = _bounds_cache.get(key)
    if hit is not None:
        return hit

    n2, n1 = grid
    best_lo = (math.inf, (0.0, 0.0))
    best_hi = (-math.inf, (0.0, 0.0))
    s2_step = (SBAR_S2_HI - SBAR_S2_LO) / max(n2 - 1, 1)
    s1_steps = {}
    for s2 in np.linspace(SBAR_S2_LO, SBAR_S2_HI, n2):
        s2 = float(s2)
        hi1 = sbar_s1_max(s2)
        s1_grid = np.linspace(SBAR_S2_LO, hi1, n1)
        s1_steps[s2] = (hi1 - SBAR_S2_LO) / max(n1 - 1, 1)
        for s1 in s1_grid:
            s1 = float(s1)
            v = f_kernel(s1, s2, _GRID_KERNEL_TOL).value
            if v < best_lo[0]:
                best_lo = (v, (s1, s2))
            if v > best_hi[0]:
                best_hi = (v, (s1, s2))

    lo_val, lo_pt = _refine(best_lo[1], (s1_steps[best_lo[1][1]], s2_step), sign=1.0)
    hi_val, hi_pt = _refine(best_hi[1], (s1_steps[best_hi[1][1]], s2_step), sign=-1.0)
    lo_val = min(lo_val, best_lo[0])
    hi_val = max(hi_val, best_hi[0])
    result = FBounds(f_low=lo_val, f_high=hi_val, argmin=lo_pt, argmax=hi_pt)
    with _bounds_lock:
        _bounds_cache.setdefault(key, result)
    return result


@dataclass(frozen=True)
class CovarianceLimits:
    """Two-sided bounds on covariance entries by pair separation."""

    sigma_low: float
    sigma_high: float

    @property
    def case_bounds(self) -> dict[str, tuple[float, float]]:
        lo, hi = self.sigma_low, self.sigma_high
        return {
            "diagonal": (2.0 * lo, 2.0 * hi),
            "adjacent": (0.5 * lo - 1.5 * hi, 0.5 * hi - 1.5 * lo),
            "distant": (lo - hi, hi - lo),
        }

    def bound_for(self, i: int, j: int) -> tuple[float, float]:
        gap = abs(i - j)
        if gap == 0:
            return self.case_bounds["diagonal"]
        if gap == 1:
            return self.case_bounds["adjacent"]
        return self.case_bounds["distant"]

    def contains(self, i: int, j: int, sigma_ij: float, slack: float = 0.0) -> bool:
        lo, hi = self.bound_for(i, j)
        return lo - slack <= sigma_ij <= hi + slack

    def to_dict(self) -> dict:
        return {
            "sigma_low": self.sigma_low,
            "sigma_high": self.sigma_high,
            "case_bounds": {k: list(v) for k, v in self.case_bounds.items()},
        }


def _require_uniform(params: PlatoonParams) -> float:
    if not params.uniform_g:
        raise ParameterError(
            "the covariance limits assume a uniform noise magnitude "
            "(identical g across vehicles)"
        )
    return float(params.g[0])


def covariance_limits(params: PlatoonParams, bounds: FBounds | None = None) -> CovarianceLimits:
    """Theorem-style sigma bounds for a uniform-noise platoon."""
    g = _require_uniform(params)
    if bounds is None:
        bounds = f_bounds()
    scale = g * g * params.tau**3 / (2.0 * math.pi)
    return CovarianceLimits(sigma_low=scale * bounds.f_low, sigma_high=scale * bounds.f_high)


def best_achievable_single(
    sigma_sign: float, params: PlatoonParams, limits: CovarianceLimits | None = None
) -> RiskValue:
    """Lower estimate of the risk at a pair adjacent to a collision, over
    all communication graphs whose modes stay in the compact region,
    branched on the sign of the cross-covariance."""
    if limits is None:
        limits = covariance_limits(params)
    r, c, eps = params.r, params.c, params.epsilon
    if sigma_sign < 0:
        return RiskValue.zero()
    if sigma_sign > 0:
        avar = r * (1.0 - math.sqrt(limits.sigma_low / limits.sigma_high))
        return levelset_risk(avar, r, c)
    avar = r - kappa(eps) * math.sqrt(2.0 * limits.sigma_low)
    return levelset_risk(avar, r, c)


def complete_graph_limit(
    i: int,
    j: int,
    d_star: float,
    params: PlatoonParams,
    limits: CovarianceLimits | None = None,
) -> RiskValue:
    """Best achievable complete-graph cascading risk at pair j given pair
    i observed at d_star; attained as sigma_c approaches 2 sigma_low."""
    if i == j:
        raise ParameterError("observed and target pairs must differ")
    for v in (i, j):
        if not 1 <= v <= params.n - 1:
            raise ParameterError(f"pair {v} outside 1..{params.n - 1}")
    if d_star < 0:
        raise ParameterError(f"observed distance must be >= 0, got {d_star}")
    if limits is None:
        limits = covariance_limits(params)
    r, c, eps = params.r, params.c, params.epsilon
    if abs(i - j) > 1:
        avar = r - kappa(eps) * math.sqrt(2.0 * limits.sigma_low)
        return levelset_risk(avar, r, c)
    avar = 0.5 * (3.0 * r - d_star - kappa(eps) * math.sqrt(6.0 * limits.sigma_low))
    return levelset_risk(avar, r, c)


@dataclass(frozen=True)
class ScreenVerdict:
    feasible: bool
    target: float
    floor: RiskValue
    estimates: dict[str, RiskValue]

    def to_dict(self) -> dict:
        return {
            "feasible": self.feasible,
            "target": self.target,
            "floor": self.floor.to_dict(),
            "estimates": {k: v.to_dict() for k, v in self.estimates.items()},
        }


def feasibility_screen(
    delta_target: float, params: PlatoonParams, limits: CovarianceLimits | None = None
) -> ScreenVerdict:
    """Screen a risk design target against the best-achievable floor.

    The floor is the largest of the three sign-branch estimates.  A
    target of 0 carries no requirement and is always feasible; a positive
    target is infeasible when it lies strictly below the floor.
    """
    if delta_target < 0:
        raise ParameterError(f"design target must be >= 0, got {delta_target}")
    if limits is None:
        limits = covariance_limits(params)
    estimates = {
        "positive_cov": best_achievable_single(1.0, params, limits),
        "zero_cov": best_achievable_single(0.0, params, limits),
        "negative_cov": best_achievable_single(-1.0, params, limits),
    }
    floor = max(estimates.values())
    if delta_target == 0:
        feasible = True
    else:
        feasible = not RiskValue.finite(delta_target) < floor
    return ScreenVerdict(
        feasible=feasible, target=delta_target, floor=floor, estimates=estimates
    )
