"""Per-device transmission-probability models.

Every model maps (polarization angle lambda, effective impact parameter b,
setting gamma) to a transmission probability in [0, 1].  Models declare
whether they actually read b and whether they read the polarization
orientation, so analysis code can tell controls from impact-sensitive
models without probing.

Built-in catalog:
  malus-probabilistic  p = cos^2(lambda - gamma); b-independent control.
  malus-deterministic  p = 1 if cos^2(lambda - gamma) >= 1/2 else 0.
  impact-modulated     p = clamp(cos^2(lambda - gamma)
                                 + epsilon * cos(2(phi_b - lambda)) * g(|b|)),
                       phi_b the orientation angle of b, g a radial profile.
  scalar-particle      p = clamp(amplitude * g(|b|)); ignores lambda and gamma.

Values outside [0, 1] before clamping are clamped, not rejected; the Monte
Carlo engine counts clamp events so heavily clamped parameter choices are
visible in reports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

from .errors import ConfigurationError
from .geometry import EffectiveImpactParameter

RADIAL_PROFILES = ("constant", "linear", "gaussian")

# integer codes shared with the evaluation kernels
MODEL_MALUS_PROB = 0
MODEL_MALUS_DET = 1
MODEL_IMPACT_MODULATED = 2
MODEL_SCALAR = 3

PROFILE_CODES = {"constant": 0, "linear": 1, "gaussian": 2}

ImpactLike = Union[EffectiveImpactParameter, Sequence[float], None]


def _impact_xy(b: ImpactLike) -> tuple[float, float]:
    if b is None:
        return 0.0, 0.0
    if isinstance(b, EffectiveImpactParameter):
        return b.bx, b.by
    return float(b[0]), float(b[1])


def radial_profile_value(profile: str, scale: float, r: float) -> float:
    """g(|b|) for the shared radial-profile family."""
    if profile == "constant":
        return 1.0
    if profile == "linear":
        return r / scale
    # gaussian
    return math.exp(-(r * r) / (2.0 * scale * scale))


@dataclass(frozen=True)
class ImpactModulationParams:
    """Amplitude and radial shape of the impact-parameter perturbation."""

    epsilon: float = 0.5
    radial_profile: str = "constant"
    scale: float = 0.25

    def __post_init__(self):
        if not (0.0 <= self.epsilon <= 1.0):
            raise ConfigurationError(f"epsilon must lie in [0, 1], got {self.epsilon}")
        if self.radial_profile not in RADIAL_PROFILES:
            raise ConfigurationError(
                f"unknown radial profile {self.radial_profile!r}; "
                f"expected one of {RADIAL_PROFILES}"
            )
        if not (self.scale > 0.0 and math.isfinite(self.scale)):
            raise ConfigurationError(f"profile scale must be positive, got {self.scale}")


class DetectionModel:
    """Contract: evaluate(lambda, b, gamma) -> probability in [0, 1].

    Evaluation is pure and instances are immutable, so models are safe to
    share across threads.  kernel_spec() exposes the parameters in the flat
    numeric form the evaluation kernels consume.
    """

    name: str = "abstract"
    uses_impact_parameter: bool = False
    uses_polarization_orientation: bool = False

    def evaluate(self, lam: float, b: ImpactLike, gamma: float) -> float:
        raise NotImplementedError

    def kernel_spec(self) -> tuple[int, int, float, float, float]:
        """(model code, profile code, epsilon, scale, amplitude)."""
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}()"


class MalusProbabilistic(DetectionModel):
    """Malus's law as a transmission probability: p = cos^2(lambda - gamma)."""

    name = "malus-probabilistic"
    uses_impact_parameter = False
    uses_polarization_orientation = True

    def evaluate(self, lam: float, b: ImpactLike, gamma: float) -> float:
        c = math.cos(lam - gamma)
        return c * c

    def kernel_spec(self):
        return (MODEL_MALUS_PROB, 0, 0.0, 1.0, 1.0)


class MalusDeterministic(DetectionModel):
    """Sharp Malus threshold: transmit iff cos^2(lambda - gamma) >= 1/2.

    Equivalently cos(2(lambda - gamma)) >= 0; the boundary transmits.
    """

    name = "malus-deterministic"
    uses_impact_parameter = False
    uses_polarization_orientation = True

    def evaluate(self, lam: float, b: ImpactLike, gamma: float) -> float:
        c2 = math.cos(2.0 * (lam - gamma))
        return 1.0 if c2 >= 0.0 else 0.0

    def kernel_spec(self):
        return (MODEL_MALUS_DET, 0, 0.0, 1.0, 1.0)


class ImpactModulated(DetectionModel):
    """Malus's law perturbed by the effective impact parameter.

    p = clamp(cos^2(lambda - gamma) + epsilon * cos(2(phi_b - lambda)) * g(|b|))

    phi_b is the orientation angle of b; the modulation couples the impact
    parameter's direction to the polarization direction.  The orientation
    factor is computed from components,

        cos(2(phi_b - lambda)) = ((bx^2 - by^2) cos 2lambda
                                  + 2 bx by sin 2lambda) / |b|^2,

    which is exact and avoids the quadrant bookkeeping of an explicit
    angle; at b = 0 the orientation is undefined and the term is taken
    as 0.  epsilon = 0 reduces exactly to malus-probabilistic.
    """

    name = "impact-modulated"
    uses_polarization_orientation = True

    def __init__(self, params: ImpactModulationParams | None = None, **kwargs):
        self.params = params if params is not None else ImpactModulationParams(**kwargs)
        self.uses_impact_parameter = self.params.epsilon != 0.0

    def evaluate(self, lam: float, b: ImpactLike, gamma: float) -> float:
        bx, by = _impact_xy(b)
        c = math.cos(lam - gamma)
        base = c * c
        r2 = bx * bx + by * by
        if r2 > 0.0:
            c2l = math.cos(2.0 * lam)
            s2l = math.sin(2.0 * lam)
            orient = ((bx * bx - by * by) * c2l + 2.0 * bx * by * s2l) / r2
        else:
            orient = 0.0
        g = radial_profile_value(self.params.radial_profile, self.params.scale, math.sqrt(r2))
        raw = base + self.params.epsilon * orient * g
        if raw < 0.0:
            return 0.0
        if raw > 1.0:
            return 1.0
        return raw

    def kernel_spec(self):
        return (
            MODEL_IMPACT_MODULATED,
            PROFILE_CODES[self.params.radial_profile],
            self.params.epsilon,
            self.params.scale,
            1.0,
        )

    def __repr__(self):
        return f"ImpactModulated({self.params!r})"


class ScalarParticle(DetectionModel):
    """Transmission set by the impact parameter alone: p = clamp(A * g(|b|)).

    A control with no polarization sensitivity at all, for separating
    geometric setting-dependence from polarization correlations.
    """

    name = "scalar-particle"
    uses_polarization_orientation = False

    def __init__(
        self, radial_profile: str = "constant", scale: float = 0.25, amplitude: float = 1.0
    ):
        if radial_profile not in RADIAL_PROFILES:
            raise ConfigurationError(
                f"unknown radial profile {radial_profile!r}; "
                f"expected one of {RADIAL_PROFILES}"
            )
        if not (scale > 0.0 and math.isfinite(scale)):
            raise ConfigurationError(f"profile scale must be positive, got {scale}")
        if not (0.0 <= amplitude and math.isfinite(amplitude)):
            raise ConfigurationError(f"amplitude must be >= 0, got {amplitude}")
        self.radial_profile = radial_profile
        self.scale = scale
        self.amplitude = amplitude
        self.uses_impact_parameter = radial_profile != "constant"

    def evaluate(self, lam: float, b: ImpactLike, gamma: float) -> float:
        bx, by = _impact_xy(b)
        r = math.sqrt(bx * bx + by * by)
        raw = self.amplitude * radial_profile_value(self.radial_profile, self.scale, r)
        if raw < 0.0:
            return 0.0
        if raw > 1.0:
            return 1.0
        return raw

    def kernel_spec(self):
        return (
            MODEL_SCALAR,
            PROFILE_CODES[self.radial_profile],
            0.0,
            self.scale,
            self.amplitude,
        )

    def __repr__(self):
        return (
            f"ScalarParticle(radial_profile={self.radial_profile!r}, "
            f"scale={self.scale}, amplitude={self.amplitude})"
        )


def evaluate(model: DetectionModel, lam: float, b: ImpactLike, gamma: float) -> float:
    """Module-level convenience wrapper for the model contract."""
    return model.evaluate(lam, b, gamma)


MODEL_TYPES = (
    "malus-probabilistic",
    "malus-deterministic",
    "impact-modulated",
    "scalar-particle",
)


def build_model(kind: str, params: Optional[dict] = None) -> DetectionModel:
    """Construct a catalog model from its name and a parameter mapping.

    Unknown names and unknown parameter keys are configuration errors so
    config-file typos cannot silently select defaults.
    """
    params = dict(params or {})
    try:
        if kind == "malus-probabilistic":
            _reject_params(kind, params)
            return MalusProbabilistic()
        if kind == "malus-deterministic":
            _reject_params(kind, params)
            return MalusDeterministic()
        if kind == "impact-modulated":
            _check_keys(kind, params, ("epsilon", "radial_profile", "scale"))
            return ImpactModulated(ImpactModulationParams(**params))
        if kind == "scalar-particle":
            _check_keys(kind, params, ("radial_profile", "scale", "amplitude"))
            return ScalarParticle(**params)
    except TypeError as exc:
        raise ConfigurationError(f"bad parameters for model {kind!r}: {exc}") from exc
    raise ConfigurationError(
        f"unknown detection model {kind!r}; expected one of {MODEL_TYPES} or 'qm-reference'"
    )


def _reject_params(kind: str, params: dict) -> None:
    if params:
        raise ConfigurationError(
            f"model {kind!r} takes no parameters, got {sorted(params)}"
        )


def _check_keys(kind: str, params: dict, allowed: tuple[str, ...]) -> None:
    unknown = sorted(set(params) - set(allowed))
    if unknown:
        raise ConfigurationError(f"unknown parameters for model {kind!r}: {unknown}")
