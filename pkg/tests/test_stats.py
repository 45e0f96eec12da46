import math

import numpy as np
import pytest

from bellmc.stats import Estimate, binomial_estimate, linear_combination, mean_estimate


def test_binomial_estimate():
    est = binomial_estimate(250, 1000)
    assert est.value == 0.25
    assert est.se == pytest.approx(math.sqrt(0.25 * 0.75 / 1000))
    assert binomial_estimate(0, 100).se == 0.0
    with pytest.raises(ValueError):
        binomial_estimate(5, 0)
    with pytest.raises(ValueError):
        binomial_estimate(11, 10)


def test_estimate_arithmetic():
    a = Estimate(1.0, 0.3)
    b = Estimate(2.0, 0.4)
    s = a + b
    assert s.value == 3.0
    assert s.se == pytest.approx(0.5)
    d = a - b
    assert d.value == -1.0
    assert d.se == pytest.approx(0.5)
    assert (2.0 * a).value == 2.0
    assert (2.0 * a).se == pytest.approx(0.6)
    assert (a + 1.0).value == 2.0
    assert (a + 1.0).se == 0.3
    assert (a - 0.5).se == 0.3


def test_linear_combination():
    terms = [(1.0, Estimate(0.5, 0.1)), (-2.0, Estimate(0.25, 0.05))]
    est = linear_combination(terms)
    assert est.value == 0.0
    assert est.se == pytest.approx(math.sqrt(0.1**2 + 0.1**2))


def test_z_against():
    assert Estimate(2.5, 0.25).z_against(2.0) == pytest.approx(2.0)
    assert Estimate(2.0, 0.0).z_against(2.0) == 0.0
    assert Estimate(3.0, 0.0).z_against(2.0) == math.inf
    assert Estimate(1.0, 0.0).z_against(2.0) == -math.inf


def test_mean_estimate():
    values = np.array([1.0, 2.0, 3.0, 4.0])
    est = mean_estimate(values)
    assert est.value == 2.5
    assert est.se == pytest.approx(np.std(values, ddof=1) / 2.0)
    assert mean_estimate([7.0]).se == 0.0
    with pytest.raises(ValueError):
        mean_estimate([])
