"""Improper-integral variance kernels for the steady-state statistics.

The delayed-mode kernel

    f(s1, s2) = integral over R of
        dr / ((s1*s2 - r^2 cos r)^2 + r^2 (s1 - r sin r)^2)

is even in r and decays like r^-4, so it is computed as twice the
half-line integral over panels of width pi (tracking the oscillation of
the trigonometric terms), each panel handled by adaptive Simpson
bisection with a Richardson error estimate.  Integration is truncated at
a radius R where the analytic tail bound drops below the requested
relative tolerance, and the leading-order tail 1/(3R^3) is added back.

The zero-delay mode integral dr / ((lam*beta - r^2)^2 + r^2 lam^2)
shares the same machinery.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import numpy as np

from .errors import NumericError, ParameterError
from .stability import in_stability_set

DEFAULT_TOL = 1e-10
_TOL_RANGE = (1e-12, 1e-4)
_MAX_SPLIT_LEVELS = 48
_MAX_RADIUS = 1e6

_cache: dict = {}
_cache_lock = threading.Lock()


@dataclass(frozen=True)
class KernelValue:
    """Kernel value with a conservative absolute error bound."""

    value: float
    est_error: float


def _adaptive_panels(f_vec, edges: np.ndarray, rel_tol: float) -> tuple[float, float]:
    """Integrate f over consecutive panels [edges[k], edges[k+1]].

    Breadth-first adaptive Simpson: every pending interval is bisected
    once per level (midpoint evaluations vectorized), and an interval is
    accepted when its Richardson estimate |S2-S1|/15 falls below
    rel_tol * |S2|.  Returns (integral, accumulated error estimate).
    """
    a = edges[:-1].astype(float)
    b = edges[1:].astype(float)
    mid = 0.5 * (a + b)
    fa = f_vec(a)
    fm = f_vec(mid)
    fb = f_vec(b)
    s = (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    total = 0.0
    err_acc = 0.0
    for level in range(_MAX_SPLIT_LEVELS):
        if a.size == 0:
            return total, err_acc
        h = 0.5 * (b - a)
        mid = a + h
        m1 = a + 0.5 * h
        m2 = a + 1.5 * h
        fm1 = f_vec(m1)
        fm2 = f_vec(m2)
        s_left = h / 6.0 * (fa + 4.0 * fm1 + fm)
        s_right = h / 6.0 * (fm + 4.0 * fm2 + fb)
        s2 = s_left + s_right
        err = (s2 - s) / 15.0
        # never accept a raw panel: one forced split guards against peaks
        # hiding between the 5 coarse nodes
        if level == 0:
            done = np.zeros(a.size, dtype=bool)
        else:
            done = np.abs(err) <= rel_tol * np.abs(s2)

        total += float(np.sum(s2[done] + err[done]))
        err_acc += float(np.sum(np.abs(err[done])))

        keep = ~done
        a = np.concatenate([a[keep], mid[keep]])
        b = np.concatenate([mid[keep], b[keep]])
        new_fa = np.concatenate([fa[keep], fm[keep]])
        new_fm = np.concatenate([fm1[keep], fm2[keep]])
        new_fb = np.concatenate([fm[keep], fb[keep]])
        fa, fm, fb = new_fa, new_fm, new_fb
        s = np.concatenate([s_left[keep], s_right[keep]])
    raise NumericError(
        "adaptive Simpson did not converge",
        detail={
            "pending_intervals": int(a.size),
            "first_interval": (float(a[0]), float(b[0])),
        },
    )


def _even_improper(f_vec, tail_q_lo, tail_q_hi, start_radius: float, tol: float) -> KernelValue:
    """Twice the half-line integral of an even integrand decaying like r^-4.

    ``tail_q_lo(R)``/``tail_q_hi(R)`` must bracket the integrand by
    1/(q_hi * r^2)^2 <= f(r) <= 1/(q_lo * r^2)^2 for r >= R, giving the
    tail bracket [1/(3 q_hi^2 R^3), 1/(3 q_lo^2 R^3)].  Panels of width pi
    are appended (doubling the radius) until the upper tail bound drops
    below half the relative tolerance, then the leading-order tail
    1/(3 R^3) is added back.
    """
    panel_tol = 0.5 * tol
    n_panels = max(2, math.ceil(start_radius / math.pi))
    total = 0.0
    err_acc = 0.0
    first = 0
    while True:
        edges = np.arange(first, n_panels + 1, dtype=float) * math.pi
        part, err = _adaptive_panels(f_vec, edges, panel_tol)
        total += part
        err_acc += err
        radius = n_panels * math.pi
        q_lo = tail_q_lo(radius)
        bound = math.inf if q_lo <= 0 else 1.0 / (3.0 * q_lo * q_lo * radius**3)
        if bound < panel_tol * total:
            break
        first = n_panels
        n_panels *= 2
        if n_panels * math.pi > _MAX_RADIUS:
            raise NumericError(
                "kernel truncation radius exceeded the cap",
                detail={"radius": radius, "tail_bound": bound, "value": total},
            )
    tail_est = 1.0 / (3.0 * radius**3)
    q_hi = tail_q_hi(radius)
    tail_lo = 1.0 / (3.0 * q_hi * q_hi * radius**3)
    tail_resid = max(bound - tail_est, tail_est - tail_lo)
    value = 2.0 * (total + tail_est)
    return KernelValue(value=value, est_error=2.0 * (err_acc + tail_resid))


def _check_tol(tol: float) -> float:
    lo, hi = _TOL_RANGE
    if not lo <= tol <= hi:
        raise ParameterError(f"kernel tolerance must lie in [{lo}, {hi}], got {tol}")
    return float(tol)


def f_kernel(s1: float, s2: float, tol: float = DEFAULT_TOL) -> KernelValue:
    """Variance kernel f(s1, s2) for a convergent mode.

    Results are cached per (s1, s2, tol); the cache is safe for
    concurrent insertion and hits are exact replays.
    """
    tol = _check_tol(tol)
    if not in_stability_set(s1, s2):
        raise ParameterError(
            f"kernel diverges at the stability boundary: ({s1}, {s2}) is not "
            "strictly inside the convergence region"
        )
    key = (round(s1, 15), round(s2, 15), tol)
    with _cache_lock:
        hit = _cache.get(key)
    if hit is not None:
        return hit

    def integrand(r: np.ndarray) -> np.ndarray:
        r2 = r * r
        return 1.0 / ((s1 * s2 - r2 * np.cos(r)) ** 2 + r2 * (s1 - r * np.sin(r)) ** 2)

    def tail_q_lo(radius: float) -> float:
        return 1.0 - s1 / radius - s1 * s2 / (radius * radius)

    def tail_q_hi(radius: float) -> float:
        return 1.0 + s1 / radius + s1 * s2 / (radius * radius)

    result = _even_improper(integrand, tail_q_lo, tail_q_hi, max(50.0, 10.0 * s1), tol)
    with _cache_lock:
        _cache.setdefault(key, result)
    return result


def f_value(s1: float, s2: float, tol: float = DEFAULT_TOL) -> float:
    return f_kernel(s1, s2, tol).value


def zero_delay_mode_integral(lam: float, beta: float, tol: float = DEFAULT_TOL) -> KernelValue:
    """Mode integral of the instantaneous-feedback platoon,
    integral over R of dr / ((lam*beta - r^2)^2 + r^2 lam^2)."""
    tol = _check_tol(tol)
    if lam <= 0 or beta <= 0:
        raise ParameterError(f"mode integral needs lam, beta > 0, got ({lam}, {beta})")

    def integrand(r: np.ndarray) -> np.ndarray:
        r2 = r * r
        return 1.0 / ((lam * beta - r2) ** 2 + r2 * lam * lam)

    def tail_q_lo(radius: float) -> float:
        return 1.0 - lam * beta / (radius * radius)

    def tail_q_hi(radius: float) -> float:
        r2 = radius * radius
        return math.sqrt((1.0 + lam * beta / r2) ** 2 + lam * lam / r2)

    start = max(50.0, 10.0 * math.sqrt(lam * beta), 2.0 * lam)
    return _even_improper(integrand, tail_q_lo, tail_q_hi, start, tol)


def kernel_cache_clear() -> None:
    with _cache_lock:
        _cache.clear()
