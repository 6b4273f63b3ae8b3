import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.stats import norm

import platoon_risk as pr
from platoon_risk.errors import ParameterError
from platoon_risk.gaussian import erfinv, normal_cdf, normal_pdf


def test_erfinv_round_trip():
    for x in np.linspace(-0.999, 0.999, 201):
        assert math.erf(erfinv(float(x))) == pytest.approx(float(x), abs=1e-14)
    with pytest.raises(ParameterError):
        erfinv(1.0)


def test_iota_kappa_at_half():
    assert pr.iota(0.5) == 0.0
    assert pr.kappa(0.5) == pytest.approx(1.0 / (math.sqrt(2 * math.pi) * 0.5), abs=1e-13)
    assert pr.kappa(0.5) == pytest.approx(0.7978845608, abs=1e-9)


def test_kappa_against_normal_cdf_oracle():
    # kappa(eps) = pdf(ppf(eps))/eps with an independent normal implementation
    for eps in (0.01, 0.05, 0.1, 0.25, 0.5, 0.9):
        oracle = norm.pdf(norm.ppf(eps)) / eps
        assert pr.kappa(eps) == pytest.approx(oracle, abs=1e-10)
    with pytest.raises(ParameterError):
        pr.kappa(0.0)


def test_kappa_strictly_decreasing():
    grid = np.linspace(0.01, 0.5, 100)
    values = [pr.kappa(float(e)) for e in grid]
    assert all(a > b for a, b in zip(values, values[1:]))


def test_var_avar_formulas():
    mu, sigma, eps = 0.3, 1.7, 0.1
    var = pr.gaussian_var(mu, sigma, eps)
    avar = pr.gaussian_avar(mu, sigma, eps)
    assert var == pytest.approx(norm.ppf(eps, mu, sigma), abs=1e-10)
    partial = quad(lambda y: y * norm.pdf(y, mu, sigma), -np.inf, var)[0] / eps
    assert avar == pytest.approx(partial, abs=1e-9)
    assert avar <= var


def test_avar_degenerate_and_half():
    assert pr.gaussian_avar(0.0, 1.0, 0.5) == pytest.approx(-0.7978845608, abs=1e-9)
    assert pr.gaussian_avar(2.0, 0.0, 0.1) == 2.0  # sigma -> 0 collapses to the mean


def test_avar_translation_scale_equivariance():
    rng = np.random.default_rng(5)
    for _ in range(50):
        mu = float(rng.normal())
        sigma = float(rng.uniform(0.1, 3.0))
        a = float(rng.uniform(0.1, 5.0))
        b = float(rng.normal())
        eps = float(rng.uniform(0.02, 0.6))
        lhs = pr.gaussian_avar(a * mu + b, a * sigma, eps)
        rhs = a * pr.gaussian_avar(mu, sigma, eps) + b
        assert lhs == pytest.approx(rhs, abs=1e-12)


def test_helper_cdf_pdf():
    assert normal_cdf(0.0) == 0.5
    assert normal_pdf(0.0) == pytest.approx(1.0 / math.sqrt(2 * math.pi), abs=1e-15)
