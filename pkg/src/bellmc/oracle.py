"""Exact, independent verifiers for the Monte Carlo engine.

Three kinds: exhaustive enumeration of deterministic strategies (the
extreme points of factorizable models, giving the exact inequality bound),
deterministic quadrature over the polarization angle for b-independent
models (and over fixed-geometry configurations for b-dependent ones), and
exact probability-weighted summation over discretized hidden-variable
grids.  Every probability formula here is written out again from the model
definitions rather than calling the kernel code, so an engine bug cannot
hide in its own oracle.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConfigurationError, OracleApplicabilityError, ResourceError
from .geometry import EffectiveImpactParameter, Lattice, fold_points
from .models import (
    DetectionModel,
    ImpactModulated,
    MalusDeterministic,
    MalusProbabilistic,
    ScalarParticle,
)

STATISTIC_FORMS = ("joint", "equal-outcome")

QUADRATURE_TOL = 1e-10
MAX_DOUBLINGS = 21  # hard cap 2^21 panels; discontinuous integrands converge
                    # only linearly, so they may stop here with ~1e-6 accuracy


# ---------------------------------------------------------------------------
# deterministic-strategy enumeration

@dataclass(frozen=True)
class DeterministicExtremum:
    """Exact extreme values of a CHSH-type statistic over the 16 strategies."""

    form: str
    maximum: float
    minimum: float
    maximizers: tuple[tuple[int, int, int, int], ...]
    minimizers: tuple[tuple[int, int, int, int], ...]


def enumerate_deterministic_max(statistic_form: str) -> DeterministicExtremum:
    """Evaluate S = v(a,b) + v(a,b') + v(a',b) - v(a',b') over all 16
    deterministic strategies (a, a', b, b') in {0,1}^4.

    form "joint": v(x, y) = x*y (both transmit).
    form "equal-outcome": v(x, y) = 1 if x == y else 0.
    """
    if statistic_form not in STATISTIC_FORMS:
        raise ConfigurationError(
            f"unknown statistic form {statistic_form!r}; expected one of {STATISTIC_FORMS}"
        )
    if statistic_form == "joint":
        def v(x, y):
            return x * y
    else:
        def v(x, y):
            return 1 if x == y else 0

    best = -math.inf
    worst = math.inf
    maximizers: list[tuple[int, int, int, int]] = []
    minimizers: list[tuple[int, int, int, int]] = []
    for a, ap, b, bp in itertools.product((0, 1), repeat=4):
        s = v(a, b) + v(a, bp) + v(ap, b) - v(ap, bp)
        if s > best:
            best = s
            maximizers = [(a, ap, b, bp)]
        elif s == best:
            maximizers.append((a, ap, b, bp))
        if s < worst:
            worst = s
            minimizers = [(a, ap, b, bp)]
        elif s == worst:
            minimizers.append((a, ap, b, bp))
    return DeterministicExtremum(
        form=statistic_form,
        maximum=float(best),
        minimum=float(worst),
        maximizers=tuple(maximizers),
        minimizers=tuple(minimizers),
    )


# ---------------------------------------------------------------------------
# transmission-probability formulas, re-derived for independence

def _radial(profile: str, scale: float, r):
    if profile == "constant":
        return np.ones_like(r)
    if profile == "linear":
        return r / scale
    return np.exp(-(r * r) / (2.0 * scale * scale))


def transmission_fn(
    model: DetectionModel, b: EffectiveImpactParameter | tuple[float, float] | None = None
) -> Callable[[np.ndarray, float], np.ndarray]:
    """Vectorized lambda -> probability map for one model.

    With b omitted the model must be b-independent (its declared flag is
    the contract); passing a fixed b supports any catalog model at frozen
    geometry.
    """
    if b is None:
        if model.uses_impact_parameter:
            raise OracleApplicabilityError(
                f"model {model.name!r} reads the impact parameter; "
                "quadrature over lambda alone does not apply"
            )
        bx, by = 0.0, 0.0
    elif isinstance(b, EffectiveImpactParameter):
        bx, by = b.bx, b.by
    else:
        bx, by = float(b[0]), float(b[1])

    if isinstance(model, MalusProbabilistic):
        def fn(lam, gamma):
            c = np.cos(lam - gamma)
            return c * c
        return fn

    if isinstance(model, MalusDeterministic):
        def fn(lam, gamma):
            return np.where(np.cos(2.0 * (lam - gamma)) >= 0.0, 1.0, 0.0)
        return fn

    if isinstance(model, ImpactModulated):
        eps = model.params.epsilon
        r2 = bx * bx + by * by
        if r2 > 0.0:
            coeff_c = (bx * bx - by * by) / r2
            coeff_s = 2.0 * bx * by / r2
        else:
            coeff_c = coeff_s = 0.0
        g = float(_radial(model.params.radial_profile, model.params.scale, np.sqrt(r2)))

        def fn(lam, gamma):
            c = np.cos(lam - gamma)
            orient = coeff_c * np.cos(2.0 * lam) + coeff_s * np.sin(2.0 * lam)
            return np.clip(c * c + eps * orient * g, 0.0, 1.0)
        return fn

    if isinstance(model, ScalarParticle):
        r = math.sqrt(bx * bx + by * by)
        p = min(1.0, max(0.0, model.amplitude * float(_radial(model.radial_profile, model.scale, np.asarray(r)))))

        def fn(lam, gamma):
            return np.full_like(lam, p)
        return fn

    raise OracleApplicabilityError(f"no oracle formula for model {model!r}")


def _refine_means(mean_fn, tol: float, max_doublings: int = MAX_DOUBLINGS):
    """Composite-midpoint averages over [0, pi) with panel doubling.

    mean_fn(lam) returns a vector of integrand means at the given midpoint
    sample.  Refinement stops when successive doublings agree within tol;
    smooth periodic integrands converge spectrally, indicator integrands
    only linearly (the cap bounds their accuracy near 1e-6).
    """
    prev = None
    for exponent in range(4, max_doublings + 1):
        n = 1 << exponent
        lam = (np.arange(n) + 0.5) * (math.pi / n)
        means = np.atleast_1d(np.asarray(mean_fn(lam), dtype=np.float64))
        if prev is not None and float(np.max(np.abs(means - prev))) <= tol:
            return means
        prev = means
    return prev


def quadrature_singles(model: DetectionModel, gamma: float, tol: float = QUADRATURE_TOL) -> float:
    """Exact singles probability of a b-independent model at one setting."""
    fn = transmission_fn(model)
    means = _refine_means(lambda lam: [np.mean(fn(lam, gamma))], tol)
    return float(means[0])


def quadrature_pair_probs(
    model_1: DetectionModel,
    model_2: DetectionModel,
    alpha: float,
    beta: float,
    tol: float = QUADRATURE_TOL,
) -> dict:
    """Exact singles, joint-transmission, and equal-outcome probabilities
    for a b-independent model pair at one setting pair."""
    f1 = transmission_fn(model_1)
    f2 = transmission_fn(model_2)

    def means(lam):
        p1 = f1(lam, alpha)
        p2 = f2(lam, beta)
        joint = p1 * p2
        equal = joint + (1.0 - p1) * (1.0 - p2)
        return [np.mean(p1), np.mean(p2), np.mean(joint), np.mean(equal)]

    m = _refine_means(means, tol)
    return {"p1": float(m[0]), "p2": float(m[1]), "joint": float(m[2]), "equal": float(m[3])}


def quadrature_coincidence(
    model_1: DetectionModel,
    model_2: DetectionModel,
    alpha: float,
    beta: float,
    tol: float = QUADRATURE_TOL,
) -> float:
    """Exact joint-transmission probability for a b-independent model pair."""
    return quadrature_pair_probs(model_1, model_2, alpha, beta, tol)["joint"]


def quadrature_residual(
    model_1: DetectionModel,
    model_2: DetectionModel,
    quad,
    b_1: EffectiveImpactParameter | tuple[float, float],
    b_2_beta: EffectiveImpactParameter | tuple[float, float],
    b_2_beta_prime: EffectiveImpactParameter | tuple[float, float],
    tol: float = QUADRATURE_TOL,
) -> float:
    """Exact fixed-geometry value of the four-factor residual expression.

    The impact parameters are frozen (point source, zero cone), so only
    the polarization angle is integrated.  Term 1 evaluates both device-2
    factors at the beta-reduced impact, term 2 at the beta'-reduced one;
    both device-1 factors always use the alpha-reduced impact.
    """
    a, ap = float(quad.alpha), float(quad.alpha_prime)
    b, bp = float(quad.beta), float(quad.beta_prime)
    f1 = transmission_fn(model_1, b_1)
    f2_at_b = transmission_fn(model_2, b_2_beta)
    f2_at_bp = transmission_fn(model_2, b_2_beta_prime)

    def means(lam):
        p1a = f1(lam, a)
        p1ap = f1(lam, ap)
        term_1 = p1a * f2_at_b(lam, b) * p1ap * f2_at_b(lam, bp)
        term_2 = p1a * f2_at_bp(lam, b) * p1ap * f2_at_bp(lam, bp)
        return [np.mean(term_1 - term_2)]

    return float(_refine_means(means, tol)[0])


# ---------------------------------------------------------------------------
# entangled-pair closed forms

def qm_pair_probs(alpha: float, beta: float) -> dict:
    """Closed-form probabilities of the entangled photon-pair reference."""
    c = math.cos(alpha - beta)
    c2 = c * c
    return {"p1": 0.5, "p2": 0.5, "joint": 0.5 * c2, "equal": c2}


# ---------------------------------------------------------------------------
# discretized exact bound check

@dataclass(frozen=True)
class DiscretizedBoundReport:
    """Exact CHSH statistics of a discretized factorizable model."""

    s_joint: float
    s_equal: float
    lambda_bins: int
    lattice_bins: int
    pair_joint: tuple[float, float, float, float]
    pair_equal: tuple[float, float, float, float]

    @property
    def within_bound(self) -> bool:
        return self.s_joint <= 2.0 and self.s_equal <= 2.0


def _grid_probs(model: DetectionModel, lam: np.ndarray, bx: np.ndarray, by: np.ndarray,
                gamma: float) -> np.ndarray:
    """Probability matrix over (lambda grid) x (impact grid), re-derived."""
    lam_c = lam[:, None]
    if isinstance(model, MalusProbabilistic):
        c = np.cos(lam_c - gamma)
        return np.broadcast_to(c * c, (lam.size, bx.size)).copy()
    if isinstance(model, MalusDeterministic):
        v = np.where(np.cos(2.0 * (lam_c - gamma)) >= 0.0, 1.0, 0.0)
        return np.broadcast_to(v, (lam.size, bx.size)).copy()
    if isinstance(model, ImpactModulated):
        eps = model.params.epsilon
        r2 = bx * bx + by * by
        with np.errstate(invalid="ignore"):
            coeff_c = np.where(r2 > 0.0, (bx * bx - by * by) / np.where(r2 > 0.0, r2, 1.0), 0.0)
            coeff_s = np.where(r2 > 0.0, 2.0 * bx * by / np.where(r2 > 0.0, r2, 1.0), 0.0)
        g = _radial(model.params.radial_profile, model.params.scale, np.sqrt(r2))
        c = np.cos(lam_c - gamma)
        orient = coeff_c[None, :] * np.cos(2.0 * lam_c) + coeff_s[None, :] * np.sin(2.0 * lam_c)
        return np.clip(c * c + eps * orient * g[None, :], 0.0, 1.0)
    if isinstance(model, ScalarParticle):
        r = np.sqrt(bx * bx + by * by)
        p = np.clip(model.amplitude * _radial(model.radial_profile, model.scale, r), 0.0, 1.0)
        return np.broadcast_to(p[None, :], (lam.size, bx.size)).copy()
    raise OracleApplicabilityError(f"no oracle formula for model {model!r}")


def discretized_bound_check(
    model_1: DetectionModel,
    model_2: DetectionModel,
    quad,
    lambda_bins: int = 64,
    lattice_bins: int = 16,
    lattice: Lattice | None = None,
) -> DiscretizedBoundReport:
    """Exact CHSH statistics of the model discretized on a finite grid.

    The hidden variables are replaced by a product grid: lambda-bin
    midpoints (uniform weights) times a square grid of frozen impact points
    covering one lattice cell (a point-source family with zero cone, so
    both photons hit the same lab point).  All probabilities are exact
    weighted sums, so the factorized structure forces both statistics to
    at most 2 with no Monte Carlo allowance.
    """
    if lambda_bins < 2:
        raise ConfigurationError(f"lambda_bins must be >= 2, got {lambda_bins}")
    if lattice_bins < 2:
        raise ConfigurationError(f"lattice_bins must be >= 2, got {lattice_bins}")
    cells = lambda_bins * lattice_bins * lattice_bins
    if cells > 10_000_000:
        raise ResourceError(
            f"discretized grid has {cells} cells, above the 1e7 guard"
        )
    lattice = lattice if lattice is not None else Lattice()
    d = lattice.period
    lam = (np.arange(lambda_bins) + 0.5) * (math.pi / lambda_bins)
    centers = -0.5 * d + (np.arange(lattice_bins) + 0.5) * (d / lattice_bins)
    gx, gy = np.meshgrid(centers, centers, indexing="ij")
    pos_x = gx.ravel()
    pos_y = gy.ravel()

    a, ap = float(quad.alpha), float(quad.alpha_prime)
    b, bp = float(quad.beta), float(quad.beta_prime)

    probs_1 = {}
    probs_2 = {}
    for gamma in (a, ap):
        bx, by = fold_points(pos_x, pos_y, gamma, lattice)
        probs_1[gamma] = _grid_probs(model_1, lam, bx, by, gamma)
    for gamma in (b, bp):
        bx, by = fold_points(pos_x, pos_y, gamma, lattice)
        probs_2[gamma] = _grid_probs(model_2, lam, bx, by, gamma)

    def pair_values(g1: float, g2: float) -> tuple[float, float]:
        p1 = probs_1[g1]
        p2 = probs_2[g2]
        joint = p1 * p2
        equal = joint + (1.0 - p1) * (1.0 - p2)
        return float(np.mean(joint)), float(np.mean(equal))

    j_ab, e_ab = pair_values(a, b)
    j_abp, e_abp = pair_values(a, bp)
    j_apb, e_apb = pair_values(ap, b)
    j_apbp, e_apbp = pair_values(ap, bp)
    return DiscretizedBoundReport(
        s_joint=j_ab + j_abp + j_apb - j_apbp,
        s_equal=e_ab + e_abp + e_apb - e_apbp,
        lambda_bins=lambda_bins,
        lattice_bins=lattice_bins,
        pair_joint=(j_ab, j_abp, j_apb, j_apbp),
        pair_equal=(e_ab, e_abp, e_apb, e_apbp),
    )


def make_pair_prob_fn(
    model_1: DetectionModel | None = None,
    model_2: DetectionModel | None = None,
    qm: bool = False,
    tol: float = 1e-9,
) -> Callable[[float, float], dict]:
    """Memoized exact pair-probability lookup for settings scans.

    Grid scans revisit the same (gamma1, gamma2) pair across many quads;
    caching turns an m^4 scan into m^2 quadratures.
    """
    cache: dict[tuple[float, float], dict] = {}

    def probs(gamma_1: float, gamma_2: float) -> dict:
        key = (gamma_1, gamma_2)
        hit = cache.get(key)
        if hit is None:
            if qm:
                hit = qm_pair_probs(gamma_1, gamma_2)
            else:
                hit = quadrature_pair_probs(model_1, model_2, gamma_1, gamma_2, tol)
            cache[key] = hit
        return hit

    return probs
