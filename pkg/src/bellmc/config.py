"""Experiment configuration files: parsing, validation, and echoing.

Configs are YAML documents with sections source, geometry, lattice, model,
run, and settings.  Validation is strict: unknown keys are rejected with
their full dotted path, and every angle must carry an explicit 'rad' or
'deg' suffix so units can never be misread silently.

to_mapping() emits the canonical form of a parsed config; from_mapping()
accepts it back unchanged, which is what lets run reports embed a config
echo that reproduces the run.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Any

import yaml

from .errors import ConfigParseError, ConfigurationError
from .geometry import ArmGeometry, Lattice
from .hidden import SourceDistribution
from .models import DetectionModel, build_model

_ANGLE_RE = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(rad|deg)\s*$")

QM_MODEL_TYPE = "qm-reference"


def parse_angle(value: Any, path: str) -> float:
    """Parse an angle string with a mandatory 'rad' or 'deg' suffix."""
    if not isinstance(value, str):
        raise ConfigurationError(
            f"{path}: angles need an explicit unit suffix, e.g. '0.7854 rad' "
            f"or '45 deg'; got {value!r}"
        )
    match = _ANGLE_RE.match(value)
    if match is None:
        raise ConfigurationError(
            f"{path}: cannot parse angle {value!r}; expected '<number> rad' or '<number> deg'"
        )
    magnitude = float(match.group(1))
    if match.group(2) == "deg":
        return math.radians(magnitude)
    return magnitude


def format_angle(value: float) -> str:
    """Canonical angle form: radians with full float precision."""
    return f"{value!r} rad"


def _require_mapping(value: Any, path: str) -> dict:
    if not isinstance(value, dict):
        raise ConfigurationError(f"{path}: expected a mapping, got {type(value).__name__}")
    return value


def _check_keys(mapping: dict, allowed: tuple[str, ...], path: str) -> None:
    unknown = sorted(set(mapping) - set(allowed))
    if unknown:
        raise ConfigurationError(f"{path}: unknown keys {unknown}; allowed keys {sorted(allowed)}")


def _number(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigurationError(f"{path}: expected a number, got {value!r}")
    out = float(value)
    if not math.isfinite(out):
        raise ConfigurationError(f"{path}: value must be finite, got {value!r}")
    return out


def _integer(value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigurationError(f"{path}: expected an integer, got {value!r}")
    return value


def _vector2(value: Any, path: str) -> tuple[float, float]:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ConfigurationError(f"{path}: expected a 2-element list, got {value!r}")
    return (_number(value[0], f"{path}[0]"), _number(value[1], f"{path}[1]"))


ModelSpec = tuple[str, dict]


@dataclass(frozen=True)
class ExperimentConfig:
    """A fully validated experiment description."""

    source: SourceDistribution
    arms: ArmGeometry
    lattice: Lattice
    model_spec_1: ModelSpec | None
    model_spec_2: ModelSpec | None
    qm_reference: bool
    events: int
    seed: int
    workers: int
    settings_kind: str  # "pair" | "quad" | "list"
    settings: tuple[float, ...] = field(default=())

    def build_models(self) -> tuple[DetectionModel | None, DetectionModel | None]:
        if self.qm_reference:
            return None, None
        return (
            build_model(self.model_spec_1[0], self.model_spec_1[1]),
            build_model(self.model_spec_2[0], self.model_spec_2[1]),
        )

    def to_mapping(self) -> dict:
        """Canonical mapping form; from_mapping() inverts it exactly."""
        if self.qm_reference:
            model_section: dict = {"both": {"type": QM_MODEL_TYPE}}
        else:
            model_section = {
                "device_1": {"type": self.model_spec_1[0], **self.model_spec_1[1]},
                "device_2": {"type": self.model_spec_2[0], **self.model_spec_2[1]},
            }
        if self.settings_kind == "pair":
            settings_section: dict = {
                "pair": {
                    "alpha": format_angle(self.settings[0]),
                    "beta": format_angle(self.settings[1]),
                }
            }
        elif self.settings_kind == "quad":
            settings_section = {
                "quad": {
                    "alpha": format_angle(self.settings[0]),
                    "alpha_prime": format_angle(self.settings[1]),
                    "beta": format_angle(self.settings[2]),
                    "beta_prime": format_angle(self.settings[3]),
                }
            }
        else:
            settings_section = {"list": [format_angle(v) for v in self.settings]}
        return {
            "source": {
                "kind": self.source.kind,
                "transverse_spread": self.source.transverse_spread,
                "cone_half_angle": format_angle(self.source.cone_half_angle),
                "center": list(self.source.center),
            },
            "geometry": {
                "length_1": self.arms.length_1,
                "length_2": self.arms.length_2,
            },
            "lattice": {
                "period": self.lattice.period,
                "rotation_center": list(self.lattice.rotation_center),
            },
            "model": model_section,
            "run": {
                "events": self.events,
                "seed": self.seed,
                "workers": self.workers,
            },
            "settings": settings_section,
        }


def _parse_source(section: Any) -> SourceDistribution:
    defaults = SourceDistribution()
    if section is None:
        return defaults
    mapping = _require_mapping(section, "source")
    _check_keys(mapping, ("kind", "transverse_spread", "cone_half_angle", "center"), "source")
    kind = mapping.get("kind", defaults.kind)
    if not isinstance(kind, str):
        raise ConfigurationError(f"source.kind: expected a string, got {kind!r}")
    spread = (
        _number(mapping["transverse_spread"], "source.transverse_spread")
        if "transverse_spread" in mapping
        else defaults.transverse_spread
    )
    if kind == "point" and "transverse_spread" not in mapping:
        spread = 0.0
    cone = (
        parse_angle(mapping["cone_half_angle"], "source.cone_half_angle")
        if "cone_half_angle" in mapping
        else defaults.cone_half_angle
    )
    center = (
        _vector2(mapping["center"], "source.center")
        if "center" in mapping
        else defaults.center
    )
    try:
        return SourceDistribution(
            kind=kind, transverse_spread=spread, cone_half_angle=cone, center=center
        )
    except ConfigurationError as exc:
        raise ConfigurationError(f"source: {exc}") from exc


def _parse_geometry(section: Any) -> ArmGeometry:
    if section is None:
        return ArmGeometry()
    mapping = _require_mapping(section, "geometry")
    _check_keys(mapping, ("length_1", "length_2"), "geometry")
    defaults = ArmGeometry()
    try:
        return ArmGeometry(
            length_1=_number(mapping["length_1"], "geometry.length_1")
            if "length_1" in mapping
            else defaults.length_1,
            length_2=_number(mapping["length_2"], "geometry.length_2")
            if "length_2" in mapping
            else defaults.length_2,
        )
    except ConfigurationError as exc:
        raise ConfigurationError(f"geometry: {exc}") from exc


def _parse_lattice(section: Any) -> Lattice:
    if section is None:
        return Lattice()
    mapping = _require_mapping(section, "lattice")
    _check_keys(mapping, ("period", "rotation_center"), "lattice")
    defaults = Lattice()
    try:
        return Lattice(
            period=_number(mapping["period"], "lattice.period")
            if "period" in mapping
            else defaults.period,
            rotation_center=_vector2(mapping["rotation_center"], "lattice.rotation_center")
            if "rotation_center" in mapping
            else defaults.rotation_center,
        )
    except ConfigurationError as exc:
        raise ConfigurationError(f"lattice: {exc}") from exc


def _parse_model_entry(entry: Any, path: str) -> ModelSpec:
    mapping = dict(_require_mapping(entry, path))
    kind = mapping.pop("type", None)
    if not isinstance(kind, str):
        raise ConfigurationError(f"{path}.type: expected a model name string, got {kind!r}")
    if kind == QM_MODEL_TYPE:
        if mapping:
            raise ConfigurationError(
                f"{path}: {QM_MODEL_TYPE} takes no parameters, got {sorted(mapping)}"
            )
        return (kind, {})
    try:
        build_model(kind, mapping)  # validates name and parameters
    except ConfigurationError as exc:
        raise ConfigurationError(f"{path}: {exc}") from exc
    return (kind, mapping)


def _parse_models(section: Any) -> tuple[ModelSpec | None, ModelSpec | None, bool]:
    mapping = _require_mapping(section, "model")
    _check_keys(mapping, ("device_1", "device_2", "both"), "model")
    if "both" in mapping:
        if "device_1" in mapping or "device_2" in mapping:
            raise ConfigurationError("model: give either 'both' or the two devices, not both")
        spec = _parse_model_entry(mapping["both"], "model.both")
        spec_1 = spec_2 = spec
    else:
        if "device_1" not in mapping or "device_2" not in mapping:
            raise ConfigurationError("model: needs 'device_1' and 'device_2' (or 'both')")
        spec_1 = _parse_model_entry(mapping["device_1"], "model.device_1")
        spec_2 = _parse_model_entry(mapping["device_2"], "model.device_2")
    qm_1 = spec_1[0] == QM_MODEL_TYPE
    qm_2 = spec_2[0] == QM_MODEL_TYPE
    if qm_1 != qm_2:
        raise ConfigurationError(
            "model: the entangled-pair reference replaces both devices; "
            "it cannot be mixed with a local model"
        )
    if qm_1:
        return None, None, True
    return spec_1, spec_2, False


def _parse_run(section: Any) -> tuple[int, int, int]:
    mapping = _require_mapping(section, "run")
    _check_keys(mapping, ("events", "seed", "workers"), "run")
    if "events" not in mapping:
        raise ConfigurationError("run.events: required")
    events = _integer(mapping["events"], "run.events")
    if events < 1:
        raise ConfigurationError(f"run.events: must be >= 1, got {events}")
    seed = _integer(mapping.get("seed", 0), "run.seed")
    workers = _integer(mapping.get("workers", 1), "run.workers")
    if workers < 1:
        raise ConfigurationError(f"run.workers: must be >= 1, got {workers}")
    return events, seed, workers


def _parse_settings(section: Any) -> tuple[str, tuple[float, ...]]:
    mapping = _require_mapping(section, "settings")
    _check_keys(mapping, ("pair", "quad", "list"), "settings")
    given = [k for k in ("pair", "quad", "list") if k in mapping]
    if len(given) != 1:
        raise ConfigurationError(
            f"settings: give exactly one of 'pair', 'quad', or 'list'; got {given}"
        )
    kind = given[0]
    if kind == "pair":
        entry = _require_mapping(mapping["pair"], "settings.pair")
        _check_keys(entry, ("alpha", "beta"), "settings.pair")
        for key in ("alpha", "beta"):
            if key not in entry:
                raise ConfigurationError(f"settings.pair.{key}: required")
        return "pair", (
            parse_angle(entry["alpha"], "settings.pair.alpha"),
            parse_angle(entry["beta"], "settings.pair.beta"),
        )
    if kind == "quad":
        entry = _require_mapping(mapping["quad"], "settings.quad")
        keys = ("alpha", "alpha_prime", "beta", "beta_prime")
        _check_keys(entry, keys, "settings.quad")
        values = []
        for key in keys:
            if key not in entry:
                raise ConfigurationError(f"settings.quad.{key}: required")
            values.append(parse_angle(entry[key], f"settings.quad.{key}"))
        return "quad", tuple(values)
    entries = mapping["list"]
    if not isinstance(entries, list) or not entries:
        raise ConfigurationError("settings.list: expected a non-empty list of angles")
    return "list", tuple(
        parse_angle(v, f"settings.list[{i}]") for i, v in enumerate(entries)
    )


def from_mapping(document: Any) -> ExperimentConfig:
    """Validate a parsed config document into an ExperimentConfig."""
    mapping = _require_mapping(document, "config")
    _check_keys(
        mapping,
        ("source", "geometry", "lattice", "model", "run", "settings"),
        "config",
    )
    for required in ("model", "run", "settings"):
        if required not in mapping:
            raise ConfigurationError(f"config: missing required section {required!r}")
    spec_1, spec_2, qm = _parse_models(mapping["model"])
    events, seed, workers = _parse_run(mapping["run"])
    settings_kind, settings = _parse_settings(mapping["settings"])
    return ExperimentConfig(
        source=_parse_source(mapping.get("source")),
        arms=_parse_geometry(mapping.get("geometry")),
        lattice=_parse_lattice(mapping.get("lattice")),
        model_spec_1=spec_1,
        model_spec_2=spec_2,
        qm_reference=qm,
        events=events,
        seed=seed,
        workers=workers,
        settings_kind=settings_kind,
        settings=settings,
    )


def loads(text: str) -> ExperimentConfig:
    """Parse config text; syntax errors carry line/column context."""
    try:
        document = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ConfigParseError(f"config syntax error{where}: {exc.problem}") from exc
    except yaml.YAMLError as exc:
        raise ConfigParseError(f"config syntax error: {exc}") from exc
    return from_mapping(document)


def load_config(path: str) -> ExperimentConfig:
    """Read and validate a config file."""
    with open(path, "r", encoding="utf-8") as handle:
        return loads(handle.read())
