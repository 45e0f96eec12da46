"""Probability estimates with standard errors and linear propagation."""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class Estimate:
    """A point estimate with its standard error."""

    value: float
    se: float

    def __add__(self, other: "Estimate | float") -> "Estimate":
        if isinstance(other, Estimate):
            return Estimate(self.value + other.value, math.hypot(self.se, other.se))
        return Estimate(self.value + other, self.se)

    def __sub__(self, other: "Estimate | float") -> "Estimate":
        if isinstance(other, Estimate):
            return Estimate(self.value - other.value, math.hypot(self.se, other.se))
        return Estimate(self.value - other, self.se)

    def __mul__(self, factor: float) -> "Estimate":
        return Estimate(self.value * factor, abs(factor) * self.se)

    __rmul__ = __mul__

    def z_against(self, bound: float) -> float:
        """(value - bound) / se; +inf when se = 0 and the bound is exceeded."""
        diff = self.value - bound
        if self.se == 0.0:
            if diff == 0.0:
                return 0.0
            return math.inf if diff > 0.0 else -math.inf
        return diff / self.se

    def __str__(self):
        return f"{self.value:.6f} +- {self.se:.6f}"


def binomial_estimate(successes: int, trials: int) -> Estimate:
    """p-hat with the binomial standard error sqrt(p(1-p)/N)."""
    if trials <= 0:
        raise ValueError(f"trials must be positive, got {trials}")
    if not (0 <= successes <= trials):
        raise ValueError(f"successes {successes} outside [0, {trials}]")
    p = successes / trials
    return Estimate(p, math.sqrt(p * (1.0 - p) / trials))


def linear_combination(terms: list[tuple[float, Estimate]]) -> Estimate:
    """sum(coefficient * estimate) with independent-error propagation."""
    value = 0.0
    var = 0.0
    for coeff, est in terms:
        value += coeff * est.value
        var += (coeff * est.se) ** 2
    return Estimate(value, math.sqrt(var))


def mean_estimate(values) -> Estimate:
    """Sample mean with its standard error (ddof=1)."""
    import numpy as np

    arr = np.asarray(values, dtype=np.float64)
    n = arr.size
    if n == 0:
        raise ValueError("cannot estimate a mean from zero samples")
    mean = float(np.mean(arr))
    if n == 1:
        return Estimate(mean, 0.0)
    sd = float(np.std(arr, ddof=1))
    return Estimate(mean, sd / math.sqrt(n))
