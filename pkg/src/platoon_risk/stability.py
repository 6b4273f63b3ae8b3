"""Convergence region of the delayed platoon and its compact subset.

A mode with dimensionless pair (s1, s2) = (lambda*tau, beta*tau) is
convergent iff s1 < pi/2 and s2 < a/tan(a), where a in (0, pi/2) solves
a*sin(a) = s1.  Both defining equations are strictly monotone on the
bracketing interval, so plain bisection is unconditionally convergent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

_BISECT_ITERS = 200
_HALF_PI = math.pi / 2.0

# Compact box used for the covariance limits: s2 in [SBAR_S2_LO, SBAR_S2_HI],
# s1 in [SBAR_MARGIN, s*sin(s*) - SBAR_MARGIN] with s*cot(s*) = s2.
SBAR_S2_LO = 0.1
SBAR_S2_HI = 0.9
SBAR_MARGIN = 0.1


@dataclass(frozen=True)
class ModeStability:
    s1: float
    s2: float
    in_s: bool


@dataclass(frozen=True)
class StabilityVerdict:
    stable: bool
    per_mode: tuple[ModeStability, ...]

    def first_failing(self) -> ModeStability | None:
        for mode in self.per_mode:
            if not mode.in_s:
                return mode
        return None

    def to_dict(self) -> dict:
        return {
            "stable": self.stable,
            "modes": [
                {"s1": m.s1, "s2": m.s2, "in_s": m.in_s} for m in self.per_mode
            ],
        }


def _bisect(func, lo: float, hi: float) -> float:
    """Bisection for a sign change of a strictly monotone function."""
    flo = func(lo)
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        fmid = func(mid)
        if fmid == 0.0:
            return mid
        if (fmid < 0) == (flo < 0):
            lo, flo = mid, fmid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def solve_a(s1: float) -> float:
    """The a in (0, pi/2) with a*sin(a) = s1; requires 0 < s1 < pi/2."""
    if not 0 < s1 < _HALF_PI:
        raise ParameterError(f"a*sin(a) = s1 is solvable on (0, pi/2) only for "
                             f"s1 in (0, pi/2), got {s1}")
    return _bisect(lambda a: a * math.sin(a) - s1, 1e-300, _HALF_PI)


def in_stability_set(s1: float, s2: float) -> bool:
    """Membership in the open convergence region S."""
    if not (math.isfinite(s1) and math.isfinite(s2)):
        return False
    if not 0 < s1 < _HALF_PI:
        return False
    if s2 <= 0:
        return False
    a = solve_a(s1)
    return s2 < a / math.tan(a)


def platoon_stable(spectrum, tau: float, beta: float) -> StabilityVerdict:
    """Verdict over the nonzero Laplacian modes (the zero mode is exempt)."""
    if tau <= 0:
        raise ParameterError(f"time delay must be > 0, got tau={tau}")
    if beta <= 0:
        raise ParameterError(f"position gain must be > 0, got beta={beta}")
    s2 = beta * tau
    modes = []
    for lam in np.asarray(spectrum.eigenvalues)[1:]:
        s1 = float(lam) * tau
        modes.append(ModeStability(s1=s1, s2=s2, in_s=in_stability_set(s1, s2)))
    return StabilityVerdict(stable=all(m.in_s for m in modes), per_mode=tuple(modes))


def solve_s_star(s2: float) -> float:
    """The s* in (0, pi/2) with s*cot(s*) = s2; x*cot(x) falls from 1 to 0."""
    if not 0 < s2 < 1:
        raise ParameterError(f"x*cot(x) = s2 is solvable on (0, pi/2) only for "
                             f"s2 in (0, 1), got {s2}")
    return _bisect(lambda x: s2 - x / math.tan(x), 1e-12, _HALF_PI - 1e-15)


def sbar_s1_max(s2: float) -> float:
    """Upper end of the s1 interval of the compact region at this s2."""
    if not SBAR_S2_LO <= s2 <= SBAR_S2_HI:
        raise ParameterError(
            f"s2 must lie in [{SBAR_S2_LO}, {SBAR_S2_HI}], got {s2}"
        )
    s_star = solve_s_star(s2)
    return s_star * math.sin(s_star) - SBAR_MARGIN


def sbar_contains(s1: float, s2: float) -> bool:
    """Membership in the closed compact region (no exception on bad s2)."""
    if not (math.isfinite(s1) and math.isfinite(s2)):
        return False
    if not SBAR_S2_LO <= s2 <= SBAR_S2_HI:
        return False
    return SBAR_MARGIN <= s1 <= sbar_s1_max(s2)


def all_modes_in_sbar(spectrum, tau: float, beta: float) -> bool:
    """Do all nonzero modes land inside the compact region?"""
    s2 = beta * tau
    return all(
        sbar_contains(float(lam) * tau, s2)
        for lam in np.asarray(spectrum.eigenvalues)[1:]
    )
