"""Ray propagation onto the polarizer planes and lattice cell folding.

Device 1 sits in the plane z = +L1 and intercepts photon 1; device 2 sits
in z = -L2 and intercepts photon 2, which flies along the exact opposite
direction.  Each polarizer carries a square lattice of period d whose
orientation follows the device setting gamma, so the physically meaningful
quantity is the impact point expressed in the rotated lattice frame and
folded into a single cell: the effective impact parameter.

The cell is the half-open square [-d/2, d/2) x [-d/2, d/2); points landing
exactly on the upper boundary fold to the lower one.  All lengths are in
units of the lattice period.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, GeometryError, StatisticsError
from .hidden import HiddenVariableSample, SourceDistribution, sample_block
from .rng import event_uniforms, stream_key

MIN_HISTOGRAM_EVENTS = 10_000


@dataclass(frozen=True)
class ArmGeometry:
    """Source-to-polarizer distances along the beam axis."""

    length_1: float = 1000.0
    length_2: float = 1000.0

    def __post_init__(self):
        if not (self.length_1 > 0.0 and self.length_2 > 0.0):
            raise ConfigurationError("arm lengths must be positive")


@dataclass(frozen=True)
class Lattice:
    """Square polarizer lattice: period and in-plane rotation center."""

    period: float = 1.0
    rotation_center: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if not (self.period > 0.0 and math.isfinite(self.period)):
            raise ConfigurationError(f"lattice period must be positive, got {self.period}")
        if len(self.rotation_center) != 2 or not all(
            math.isfinite(c) for c in self.rotation_center
        ):
            raise ConfigurationError("rotation_center must be a finite 2-vector")


@dataclass(frozen=True)
class EffectiveImpactParameter:
    """Impact point in the rotated lattice frame, folded into one cell."""

    bx: float
    by: float

    @property
    def reduced(self) -> np.ndarray:
        return np.array([self.bx, self.by])

    @property
    def radius(self) -> float:
        return math.sqrt(self.bx * self.bx + self.by * self.by)


def propagate(sample: HiddenVariableSample, arms: ArmGeometry) -> tuple[np.ndarray, np.ndarray]:
    """Intersect both photon rays with their polarizer planes.

    The source sits in the plane z = 0; with transverse slope
    t = direction_xy / direction_z the impact points are s_T + L1*t for
    photon 1 and s_T - L2*t for photon 2 (photon 2 reverses the ray), so
    for equal arms the two impacts always average to the source position.

    Returns the two lab-frame transverse impact points, device 1 first.
    """
    direction = sample.source.direction
    dz = float(direction[2])
    if dz <= 0.0:
        raise GeometryError(f"ray with direction z-component {dz} misses device 1")
    sx = float(sample.source.position[0])
    sy = float(sample.source.position[1])
    tx = float(direction[0]) / dz
    ty = float(direction[1]) / dz
    hit_1 = np.array([sx + arms.length_1 * tx, sy + arms.length_1 * ty])
    hit_2 = np.array([sx - arms.length_2 * tx, sy - arms.length_2 * ty])
    return hit_1, hit_2


def wrap_to_cell(value: float, period: float) -> float:
    """Fold one lattice-frame coordinate into [-period/2, period/2)."""
    half = 0.5 * period
    out = value - period * math.floor(value / period + 0.5)
    # floor rounding can leave a result on the closed boundary; fix it up.
    if out >= half:
        out -= period
    if out < -half:
        out += period
    return out


def effective_impact(
    point: np.ndarray, gamma: float, lattice: Lattice
) -> EffectiveImpactParameter:
    """Reduce a lab-frame impact point to its effective impact parameter.

    The point (relative to the rotation center) is rotated by -gamma into
    the grid frame of the polarizer, then each component is folded modulo
    the period into [-d/2, d/2): the displacement from the nearest
    interaction center.  Rotating the polarizer by +gamma and rotating the
    point by -gamma are the same operation, which is how the local setting
    enters the reduced coordinate.
    """
    cx, cy = lattice.rotation_center
    x = float(point[0]) - cx
    y = float(point[1]) - cy
    c = math.cos(gamma)
    s = math.sin(gamma)
    bx = c * x + s * y
    by = c * y - s * x
    return EffectiveImpactParameter(
        bx=wrap_to_cell(bx, lattice.period),
        by=wrap_to_cell(by, lattice.period),
    )


def fold_points(
    x: np.ndarray, y: np.ndarray, gamma: float, lattice: Lattice
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized effective_impact over arrays of lab-frame coordinates.

    Operation order matches the scalar path and the compiled kernel exactly
    so all three produce bit-identical cell coordinates.
    """
    cx, cy = lattice.rotation_center
    xr = np.asarray(x, dtype=np.float64) - cx
    yr = np.asarray(y, dtype=np.float64) - cy
    c = math.cos(gamma)
    s = math.sin(gamma)
    bx = c * xr + s * yr
    by = c * yr - s * xr
    d = lattice.period
    half = 0.5 * d
    bx = bx - d * np.floor(bx / d + 0.5)
    by = by - d * np.floor(by / d + 0.5)
    bx = np.where(bx >= half, bx - d, bx)
    bx = np.where(bx < -half, bx + d, bx)
    by = np.where(by >= half, by - d, by)
    by = np.where(by < -half, by + d, by)
    return bx, by


def sample_impacts(
    distribution: SourceDistribution,
    arms: ArmGeometry,
    lattice: Lattice,
    gamma: float,
    n: int,
    seed: int,
    label: str = "hist",
    device: int = 1,
) -> tuple[np.ndarray, np.ndarray]:
    """Draw n events and return their reduced impact parameters at one device."""
    if device not in (1, 2):
        raise ConfigurationError(f"device must be 1 or 2, got {device}")
    key = stream_key(seed, label)
    block = sample_block(distribution, event_uniforms(key, 0, n))
    bad = np.nonzero(block.dir_z <= 0.0)[0]
    if bad.size:
        raise GeometryError("ray cannot reach the polarizer plane", event_index=int(bad[0]))
    tx = block.dir_x / block.dir_z
    ty = block.dir_y / block.dir_z
    if device == 1:
        hx = block.pos_x + arms.length_1 * tx
        hy = block.pos_y + arms.length_1 * ty
    else:
        hx = block.pos_x - arms.length_2 * tx
        hy = block.pos_y - arms.length_2 * ty
    return fold_points(hx, hy, gamma, lattice)


def bin_impacts(
    bx: np.ndarray, by: np.ndarray, lattice: Lattice, bins: int = 32
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Bin reduced impact parameters on a regular grid over the cell.

    Returns (counts, x_edges, y_edges); counts[i, j] covers the box
    x_edges[i]..x_edges[i+1] by y_edges[j]..y_edges[j+1].
    """
    if bins < 1:
        raise ConfigurationError(f"histogram needs at least one bin, got {bins}")
    half = 0.5 * lattice.period
    bx = np.asarray(bx, dtype=np.float64)
    by = np.asarray(by, dtype=np.float64)
    if bx.size and (
        np.min(bx) < -half or np.max(bx) >= half or np.min(by) < -half or np.max(by) >= half
    ):
        raise GeometryError("impact parameters fall outside the lattice cell")
    edges = np.linspace(-half, half, bins + 1)
    counts, xe, ye = np.histogram2d(bx, by, bins=(edges, edges))
    return counts, xe, ye


def impact_histogram(
    distribution: SourceDistribution,
    arms: ArmGeometry,
    lattice: Lattice,
    gamma: float,
    n: int,
    seed: int,
    bins: int = 32,
    device: int = 1,
    label: str = "hist",
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Normalized 2-D frequency histogram of reduced impacts under one setting.

    Requires enough events for the bin frequencies to be meaningful.
    Returns (frequencies, x_edges, y_edges) with frequencies summing to 1.
    """
    if n < MIN_HISTOGRAM_EVENTS:
        raise StatisticsError(
            f"histogram needs at least {MIN_HISTOGRAM_EVENTS} events, got {n}"
        )
    bx, by = sample_impacts(distribution, arms, lattice, gamma, n, seed, label, device)
    counts, xe, ye = bin_impacts(bx, by, lattice, bins)
    return counts / float(n), xe, ye
