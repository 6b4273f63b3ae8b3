import math

import numpy as np
import pytest

import platoon_risk as pr
from platoon_risk.errors import ParameterError
from platoon_risk.stability import solve_a, solve_s_star

RNG = np.random.default_rng(7)


def test_defining_equation_residuals():
    for s1 in (0.05, 0.3, 0.8, 1.2, 1.5):
        a = solve_a(s1)
        assert abs(a * math.sin(a) - s1) < 1e-12
    for s2 in (0.1, 0.35, 0.6, 0.9):
        s_star = solve_s_star(s2)
        assert abs(s_star / math.tan(s_star) - s2) < 1e-12


def test_membership_examples():
    # s1 >= pi/2 is excluded outright
    assert not pr.in_stability_set(1.6, 0.01)
    # frozen from the bisection oracle: a(0.8) = 0.969899, a/tan(a) = 0.664822
    a = solve_a(0.8)
    assert a == pytest.approx(0.9698986739189083, abs=1e-12)
    assert a / math.tan(a) == pytest.approx(0.6648222947888612, abs=1e-12)
    assert pr.in_stability_set(0.8, 0.04)
    assert not pr.in_stability_set(0.8, 0.7)
    assert not pr.in_stability_set(0.8, 0.0)
    assert not pr.in_stability_set(-0.1, 0.1)


def test_platoon_stable_complete20():
    spec = pr.graph_spectrum(pr.complete_graph(20))
    verdict = pr.platoon_stable(spec, tau=0.04, beta=1.0)
    assert verdict.stable
    # all nonzero modes sit at the same point (0.8, 0.04)
    assert all(m.s1 == pytest.approx(0.8, abs=1e-9) for m in verdict.per_mode)


def test_platoon_unstable_complete40():
    spec = pr.graph_spectrum(pr.complete_graph(40))
    verdict = pr.platoon_stable(spec, tau=0.04, beta=1.0)
    assert not verdict.stable
    bad = verdict.first_failing()
    assert bad.s1 == pytest.approx(1.6, abs=1e-9)


def test_platoon_stable_path20():
    spec = pr.graph_spectrum(pr.path_graph(20))
    verdict = pr.platoon_stable(spec, tau=0.04, beta=1.0)
    assert verdict.stable
    assert max(m.s1 for m in verdict.per_mode) < 0.16


def test_sbar_examples():
    # frozen from the bisection oracle on x*cot(x) = 0.9
    assert solve_s_star(0.9) == pytest.approx(0.5422808854161557, abs=1e-12)
    assert not pr.sbar_contains(0.05, 0.5)
    assert pr.sbar_contains(0.1, 0.1)
    assert pr.sbar_s1_max(0.1) > 0.1
    with pytest.raises(ParameterError):
        pr.sbar_s1_max(0.95)
    assert not pr.sbar_contains(0.2, 0.95)


def test_sbar_subset_of_s():
    hits = 0
    for _ in range(10_000):
        s1 = RNG.uniform(0.0, 1.7)
        s2 = RNG.uniform(0.0, 1.0)
        if pr.sbar_contains(s1, s2):
            hits += 1
            assert pr.in_stability_set(s1, s2)
    assert hits > 100  # the sampler actually exercised the region


def test_monotone_in_s2_single_threshold():
    for s1 in (0.2, 0.7, 1.3):
        values = [pr.in_stability_set(s1, s2) for s2 in np.linspace(1e-6, 1.2, 400)]
        # one downward flip only: True..True False..False
        flips = sum(1 for a, b in zip(values, values[1:]) if a != b)
        assert values[0] and not values[-1] and flips == 1
