"""Hidden-variable data model and setting-independent event sampling.

Each simulated pair emission carries two kinds of hidden state: the shared
polarization angle and the source state (emission point plus flight
direction of photon 1; photon 2 travels along the exact opposite
direction).  Samplers deliberately take no polarizer settings — the
distributions cannot depend on what the devices will later measure.

All lengths are in units of the polarizer lattice constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError
from .rng import EventStream

_UNIT_TOL = 1e-12
TWO_PI = 2.0 * math.pi

SOURCE_KINDS = ("point", "gaussian", "uniform-disc")
MAX_CONE_HALF_ANGLE = math.pi / 4.0


@dataclass(frozen=True)
class PolarizationState:
    """Linear polarization direction, canonicalized to [0, pi)."""

    angle: float

    def __post_init__(self):
        if not (0.0 <= self.angle < math.pi):
            raise ConfigurationError(
                f"polarization angle {self.angle} outside [0, pi)"
            )


@dataclass(frozen=True)
class SourceState:
    """Emission point (3-vector) and unit flight direction of photon 1."""

    position: np.ndarray
    direction: np.ndarray

    def __post_init__(self):
        pos = np.asarray(self.position, dtype=np.float64)
        direc = np.asarray(self.direction, dtype=np.float64)
        if pos.shape != (3,) or direc.shape != (3,):
            raise ConfigurationError("position and direction must be 3-vectors")
        norm = float(np.sqrt(direc @ direc))
        if abs(norm - 1.0) > _UNIT_TOL:
            raise ConfigurationError(f"direction norm {norm} is not 1")
        if direc[2] <= 0.0:
            raise ConfigurationError(
                "photon 1 must travel toward device 1 (direction z > 0)"
            )
        object.__setattr__(self, "position", pos)
        object.__setattr__(self, "direction", direc)


@dataclass(frozen=True)
class HiddenVariableSample:
    polarization: PolarizationState
    source: SourceState


@dataclass(frozen=True)
class SourceDistribution:
    """Distribution of the source state.

    kind:
        "point"        delta at ``center``
        "gaussian"     isotropic transverse normal, sigma = transverse_spread
        "uniform-disc" uniform on a disc of radius transverse_spread
    transverse_spread: sigma or disc radius, in lattice constants.
    cone_half_angle: emission directions are uniform (per solid angle) in a
        cone of this half-angle about the beam axis; capped at pi/4 so rays
        always advance toward the polarizer planes.
    center: transverse offset of the distribution from the beam axis.
    """

    kind: str = "gaussian"
    transverse_spread: float = 5.0
    cone_half_angle: float = 1e-3
    center: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.kind not in SOURCE_KINDS:
            raise ConfigurationError(
                f"unknown source kind {self.kind!r}; expected one of {SOURCE_KINDS}"
            )
        if self.transverse_spread < 0.0:
            raise ConfigurationError(
                f"transverse_spread must be >= 0, got {self.transverse_spread}"
            )
        if self.kind == "point" and self.transverse_spread != 0.0:
            raise ConfigurationError("point sources require transverse_spread = 0")
        if not (0.0 <= self.cone_half_angle <= MAX_CONE_HALF_ANGLE):
            raise ConfigurationError(
                f"cone_half_angle must lie in [0, pi/4], got {self.cone_half_angle}"
            )
        if len(self.center) != 2 or not all(math.isfinite(c) for c in self.center):
            raise ConfigurationError("center must be a finite 2-vector")


@dataclass
class EventBlock:
    """Struct-of-arrays view of a contiguous range of sampled events."""

    lam: np.ndarray
    pos_x: np.ndarray
    pos_y: np.ndarray
    dir_x: np.ndarray
    dir_y: np.ndarray
    dir_z: np.ndarray
    draw_1: np.ndarray = field(repr=False, default=None)
    draw_2: np.ndarray = field(repr=False, default=None)


def sample_block(distribution: SourceDistribution, uniforms: np.ndarray) -> EventBlock:
    """Turn per-event uniforms (n, 8) into hidden-variable arrays.

    Every random quantity is derived from its fixed uniform slots by
    explicit inverse transforms (Box-Muller for the gaussian case), never
    by stateful generator calls, so backends agree bit for bit.
    """
    u = np.atleast_2d(np.asarray(uniforms, dtype=np.float64))
    lam = math.pi * u[:, 0]

    cx, cy = distribution.center
    if distribution.kind == "point":
        pos_x = np.full(u.shape[0], cx)
        pos_y = np.full(u.shape[0], cy)
    elif distribution.kind == "gaussian":
        amp = np.sqrt(-2.0 * np.log(1.0 - u[:, 1]))
        ang = TWO_PI * u[:, 2]
        pos_x = cx + distribution.transverse_spread * (amp * np.cos(ang))
        pos_y = cy + distribution.transverse_spread * (amp * np.sin(ang))
    else:  # uniform-disc
        rad = distribution.transverse_spread * np.sqrt(u[:, 1])
        ang = TWO_PI * u[:, 2]
        pos_x = cx + rad * np.cos(ang)
        pos_y = cy + rad * np.sin(ang)

    # Uniform on the spherical cap: cos(theta) linear in the uniform slot.
    # cone_half_angle == 0 collapses to exactly (0, 0, 1).
    mu = 1.0 - u[:, 3] * (1.0 - math.cos(distribution.cone_half_angle))
    sin_theta = np.sqrt(1.0 - mu * mu)
    phi = TWO_PI * u[:, 4]
    dir_x = sin_theta * np.cos(phi)
    dir_y = sin_theta * np.sin(phi)

    return EventBlock(
        lam=lam,
        pos_x=pos_x,
        pos_y=pos_y,
        dir_x=dir_x,
        dir_y=dir_y,
        dir_z=mu,
        draw_1=u[:, 5],
        draw_2=u[:, 6],
    )


def sample_hidden_variables(
    distribution: SourceDistribution, stream: EventStream
) -> HiddenVariableSample:
    """Draw one event's hidden variables from its random stream.

    Replaying the same stream yields a bit-identical sample.  The signature
    carries no polarizer settings by design.
    """
    block = sample_block(distribution, stream.uniforms())
    return HiddenVariableSample(
        polarization=PolarizationState(float(block.lam[0])),
        source=SourceState(
            position=np.array([block.pos_x[0], block.pos_y[0], 0.0]),
            direction=np.array([block.dir_x[0], block.dir_y[0], block.dir_z[0]]),
        ),
    )
