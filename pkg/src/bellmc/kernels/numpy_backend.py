"""Vectorized fallback implementation of the per-event counting kernels.

This module and the compiled kernel implement the same per-event pipeline
with the same floating-point operation order, so both produce bit-identical
integer counts from the same event arrays.  Keep every formula here in
lockstep with _fast.pyx; the cross-backend identity test enforces it.

Kernel inputs are the raw per-event arrays produced by the sampling layer;
kernel outputs are exact integer counts, which are insensitive to the
last-ulp differences that vectorized transcendentals could otherwise
introduce.
"""

from __future__ import annotations

import math

import numpy as np

NAME = "numpy"

# model codes (mirrored from bellmc.models, kept literal here so the two
# backend modules stay dependency-free and identical in structure)
_MALUS_PROB = 0
_MALUS_DET = 1
_IMPACT_MOD = 2
_SCALAR = 3

_PROFILE_CONSTANT = 0
_PROFILE_LINEAR = 1
_PROFILE_GAUSSIAN = 2


def fold_arrays(
    x: np.ndarray,
    y: np.ndarray,
    gamma: float,
    period: float,
    cx: float,
    cy: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Rotate lab-frame points by -gamma about (cx, cy) and fold into the cell."""
    xr = x - cx
    yr = y - cy
    c = math.cos(gamma)
    s = math.sin(gamma)
    bx = c * xr + s * yr
    by = c * yr - s * xr
    half = 0.5 * period
    bx = bx - period * np.floor(bx / period + 0.5)
    by = by - period * np.floor(by / period + 0.5)
    bx = np.where(bx >= half, bx - period, bx)
    bx = np.where(bx < -half, bx + period, bx)
    by = np.where(by >= half, by - period, by)
    by = np.where(by < -half, by + period, by)
    return bx, by


def _radial_profile(profile_id: int, scale: float, r: np.ndarray) -> np.ndarray:
    if profile_id == _PROFILE_CONSTANT:
        return np.ones_like(r)
    if profile_id == _PROFILE_LINEAR:
        return r / scale
    return np.exp(-(r * r) / (2.0 * scale * scale))


def eval_probs(
    spec: tuple,
    lam: np.ndarray,
    bx: np.ndarray,
    by: np.ndarray,
    gamma: float,
) -> tuple[np.ndarray, int]:
    """Transmission probabilities for one device over an event block.

    Returns (probabilities, clamp-event count).
    """
    model_id, profile_id, epsilon, scale, amplitude = spec
    if model_id == _MALUS_PROB:
        c = np.cos(lam - gamma)
        return c * c, 0
    if model_id == _MALUS_DET:
        c2 = np.cos(2.0 * (lam - gamma))
        return np.where(c2 >= 0.0, 1.0, 0.0), 0
    if model_id == _IMPACT_MOD:
        c = np.cos(lam - gamma)
        base = c * c
        r2 = bx * bx + by * by
        c2l = np.cos(2.0 * lam)
        s2l = np.sin(2.0 * lam)
        num = (bx * bx - by * by) * c2l + 2.0 * bx * by * s2l
        safe = np.where(r2 > 0.0, r2, 1.0)
        orient = np.where(r2 > 0.0, num / safe, 0.0)
        g = _radial_profile(profile_id, scale, np.sqrt(r2))
        raw = base + epsilon * orient * g
        clamps = int(np.count_nonzero((raw < 0.0) | (raw > 1.0)))
        return np.clip(raw, 0.0, 1.0), clamps
    if model_id == _SCALAR:
        r = np.sqrt(bx * bx + by * by)
        raw = amplitude * _radial_profile(profile_id, scale, r)
        clamps = int(np.count_nonzero((raw < 0.0) | (raw > 1.0)))
        return np.clip(raw, 0.0, 1.0), clamps
    raise ValueError(f"unknown model code {model_id}")


def pair_counts(
    lam: np.ndarray,
    px: np.ndarray,
    py: np.ndarray,
    dx: np.ndarray,
    dy: np.ndarray,
    dz: np.ndarray,
    u1: np.ndarray,
    u2: np.ndarray,
    length_1: float,
    length_2: float,
    period: float,
    cx: float,
    cy: float,
    alpha: float,
    beta: float,
    spec_1: tuple,
    spec_2: tuple,
) -> tuple[int, int, int, int, int, int, int, int]:
    """Count outcomes for one event block under a fixed setting pair.

    Returns (n1+, n2+, n++, n+-, n-+, n--, clamp events, error index);
    error index is -1 normally, else the in-block index of the first event
    whose ray cannot reach a polarizer plane (all counts zeroed).
    """
    n = lam.shape[0]
    bad = np.nonzero(dz <= 0.0)[0]
    if bad.size:
        return (0, 0, 0, 0, 0, 0, 0, int(bad[0]))
    tx = dx / dz
    ty = dy / dz
    h1x = px + length_1 * tx
    h1y = py + length_1 * ty
    h2x = px - length_2 * tx
    h2y = py - length_2 * ty
    b1x, b1y = fold_arrays(h1x, h1y, alpha, period, cx, cy)
    b2x, b2y = fold_arrays(h2x, h2y, beta, period, cx, cy)
    p1, clamps_1 = eval_probs(spec_1, lam, b1x, b1y, alpha)
    p2, clamps_2 = eval_probs(spec_2, lam, b2x, b2y, beta)
    o1 = u1 < p1
    o2 = u2 < p2
    n_pp = int(np.count_nonzero(o1 & o2))
    n_pm = int(np.count_nonzero(o1 & ~o2))
    n_mp = int(np.count_nonzero(~o1 & o2))
    n_mm = n - n_pp - n_pm - n_mp
    return (
        n_pp + n_pm,
        n_pp + n_mp,
        n_pp,
        n_pm,
        n_mp,
        n_mm,
        clamps_1 + clamps_2,
        -1,
    )


def qm_counts(u: np.ndarray, alpha: float, beta: float) -> tuple[int, int, int, int, int, int, int, int]:
    """Count outcomes for the entangled-pair reference sampler.

    One uniform per event selects among the four joint outcomes with
    P(++) = P(--) = cos^2(alpha-beta)/2 and P(+-) = P(-+) = sin^2/2.
    Same return layout as pair_counts.
    """
    n = u.shape[0]
    c = math.cos(alpha - beta)
    peq = c * c
    t1 = 0.5 * peq
    t2 = peq
    t3 = peq + 0.5 * (1.0 - peq)
    below_1 = int(np.count_nonzero(u < t1))
    below_2 = int(np.count_nonzero(u < t2))
    below_3 = int(np.count_nonzero(u < t3))
    n_pp = below_1
    n_mm = below_2 - below_1
    n_pm = below_3 - below_2
    n_mp = n - below_3
    return (n_pp + n_pm, n_pp + n_mp, n_pp, n_pm, n_mp, n_mm, 0, -1)
