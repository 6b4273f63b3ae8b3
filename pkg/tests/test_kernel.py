import math

import numpy as np
import pytest
from scipy.integrate import quad

import platoon_risk as pr
from platoon_risk.errors import ParameterError
from platoon_risk.kernel import f_kernel, zero_delay_mode_integral


def scipy_f(s1, s2, panels=400):
    """Independent reference: piecewise QUADPACK plus leading-order tail."""

    def g(r):
        return 1.0 / ((s1 * s2 - r * r * math.cos(r)) ** 2 + r * r * (s1 - r * math.sin(r)) ** 2)

    total = 0.0
    for k in range(panels):
        v, _ = quad(g, k * math.pi, (k + 1) * math.pi, limit=300, epsabs=0.0, epsrel=1e-12)
        total += v
    return 2.0 * (total + 1.0 / (3.0 * (panels * math.pi) ** 3))


@pytest.mark.parametrize(
    "s1,s2",
    [(0.8, 0.04), (0.1, 0.1), (0.1799, 0.9), (1.2, 0.1), (0.5, 0.5), (0.000984, 0.04)],
)
def test_kernel_matches_independent_quadrature(s1, s2):
    kv = f_kernel(s1, s2, 1e-10)
    ref = scipy_f(s1, s2)
    assert kv.value == pytest.approx(ref, rel=1e-9)


def test_kernel_error_bound_contract():
    for tol in (1e-6, 1e-8, 1e-10):
        kv = f_kernel(0.8, 0.04, tol)
        assert kv.value > 0
        assert kv.est_error <= tol * kv.value * (1 + 1e-12)


def test_halving_tol_moves_less_than_previous_error():
    s1, s2 = 0.37, 0.22
    tol = 1e-5
    prev = f_kernel(s1, s2, tol)
    for _ in range(6):
        tol /= 2.0
        cur = f_kernel(s1, s2, tol)
        assert abs(cur.value - prev.value) <= prev.est_error * (1 + 1e-9)
        prev = cur


def test_evenness_of_integrand():
    # integrand is even in r, so the negative half-line equals the positive one
    s1, s2 = 0.6, 0.3
    def g(r):
        return 1.0 / ((s1 * s2 - r * r * math.cos(r)) ** 2 + r * r * (s1 - r * math.sin(r)) ** 2)
    left = quad(lambda r: g(-r), 0, 30, limit=200, epsrel=1e-11)[0]
    right = quad(g, 0, 30, limit=200, epsrel=1e-11)[0]
    assert left == pytest.approx(right, rel=1e-10)


def test_outside_stability_region_rejected():
    with pytest.raises(ParameterError, match="stability boundary"):
        f_kernel(1.6, 0.01)
    with pytest.raises(ParameterError, match="stability boundary"):
        f_kernel(0.8, 0.7)
    with pytest.raises(ParameterError):
        f_kernel(0.8, 0.04, tol=1e-3)  # tolerance outside the allowed window


def test_kernel_cache_replays():
    a = f_kernel(0.45, 0.18, 1e-10)
    b = f_kernel(0.45, 0.18, 1e-10)
    assert a is b or (a.value == b.value and a.est_error == b.est_error)


def test_zero_delay_closed_form():
    # partial-fraction closed form of the mode integral: pi / (lam^2 beta)
    for lam, beta in ((2.0, 1.0), (0.5, 3.0), (20.0, 1.0), (7.3, 0.4)):
        kv = zero_delay_mode_integral(lam, beta, 1e-10)
        assert kv.value == pytest.approx(math.pi / (lam * lam * beta), rel=1e-9)


def test_zero_delay_integrand_at_origin():
    lam, beta = 3.0, 0.7
    assert 1.0 / (lam * beta) ** 2 == pytest.approx(1.0 / ((lam * beta - 0.0) ** 2), rel=1e-15)


def test_small_delay_limit_matches_zero_delay():
    # tau^3 f(lam tau, beta tau) approaches the zero-delay mode integral
    lam, beta = 2.0, 1.0
    target = zero_delay_mode_integral(lam, beta, 1e-11).value
    gaps = []
    for tau in (1e-3, 1e-4):
        approx = tau**3 * f_kernel(lam * tau, beta * tau, 1e-11).value
        gaps.append(abs(approx - target) / target)
    assert gaps[1] < gaps[0]
    assert gaps[1] < 1e-3
