"""Scenario configuration: types, validation, and the YAML file format.

Scenario files are YAML (JSON is accepted too, being a YAML subset).  Every
field is optional except ``arrival_weights``; omitted fields take the
defaults below.  Field names mirror :class:`ScenarioConfig` one to one::

    schema_version: 1
    name: skewed-right
    duration: 300            # seconds
    seed: 7
    p_arrival: 0.085         # per-tick spawn probability (tick = 0.1 s)
    arrival_weights: {Right: 0.7, Down: 0.1, Left: 0.1, Up: 0.1}
    class_mix: {Car: 0.5, Motorcycle: 0.2, Bus: 0.1, Truck: 0.1, Rickshaw: 0.1}
    turn_probability: 0.3
    num_through_lanes: 2
    approach_length: 50.0    # metres from spawn edge to stop line
    controller: {default_green: 20, yellow_time: 5, min_green: 10, max_green: 60,
                 static_green: 30, detection_lead: 5, no_of_lanes: 2}
    noise: {detect_prob: {Car: 0.9}, false_per_snapshot: {Car: 0.2}}
    vehicle_classes: {Bus: {length: 12.0, cruise_speed: 8.0, avg_cross_time: 3.0}}
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Mapping

import yaml

from .detection import NoiseParams
from .signals import ControllerConfig
from .vehicles import DEFAULT_CLASSES, DIRECTIONS, KINDS, Direction, VehicleClass, VehicleKind

SCHEMA_VERSION = 1
WEIGHT_TOL = 1e-9

# Demand calibration: roughly 0.85 arrivals/s over the junction, which is more
# than a 30 s fixed-time cycle can discharge on the busiest approach of a
# skewed scenario, so controller choice visibly matters.
DEFAULT_P_ARRIVAL = 0.085
DEFAULT_APPROACH_LENGTH = 50.0
DEFAULT_TURN_PROBABILITY = 0.3
DEFAULT_CLASS_MIX: dict[VehicleKind, float] = {
    VehicleKind.CAR: 0.5,
    VehicleKind.MOTORCYCLE: 0.2,
    VehicleKind.BUS: 0.1,
    VehicleKind.TRUCK: 0.1,
    VehicleKind.RICKSHAW: 0.1,
}


class ConfigError(Exception):
    """Base class for scenario loading failures."""


class ScenarioFileError(ConfigError):
    pass


class ScenarioSyntaxError(ConfigError):
    pass


class ScenarioValidationError(ConfigError):
    def __init__(self, problems: list[tuple[str, str]]):
        self.problems = problems
        super().__init__("; ".join(f"{path}: {msg}" for path, msg in problems))


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    arrival_weights: Mapping[Direction, float]
    duration: float = 300.0
    p_arrival: float = DEFAULT_P_ARRIVAL
    class_mix: Mapping[VehicleKind, float] = field(default_factory=lambda: dict(DEFAULT_CLASS_MIX))
    turn_probability: float = DEFAULT_TURN_PROBABILITY
    controller: ControllerConfig = field(default_factory=ControllerConfig)
    noise: NoiseParams = field(default_factory=NoiseParams)
    seed: int = 0
    num_through_lanes: int = 2
    approach_length: float = DEFAULT_APPROACH_LENGTH
    vehicle_classes: Mapping[VehicleKind, VehicleClass] = field(default_factory=lambda: dict(DEFAULT_CLASSES))

    @property
    def num_lanes(self) -> int:
        return self.num_through_lanes + 1

    @property
    def avg_cross_time(self) -> dict[VehicleKind, float]:
        return {k: c.avg_cross_time for k, c in self.vehicle_classes.items()}

    def problems(self) -> list[tuple[str, str]]:
        out: list[tuple[str, str]] = []
        if not self.name:
            out.append(("name", "must be non-empty"))
        if not self.duration > 0:
            out.append(("duration", f"must be > 0, got {self.duration!r}"))
        out += _weight_problems("arrival_weights", self.arrival_weights, DIRECTIONS)
        out += _weight_problems("class_mix", self.class_mix, KINDS)
        for name in ("p_arrival", "turn_probability"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                out.append((name, f"must be a probability in [0, 1], got {v!r}"))
        if isinstance(self.num_through_lanes, bool) or not isinstance(self.num_through_lanes, int) \
                or self.num_through_lanes < 1:
            out.append(("num_through_lanes", f"must be an integer >= 1, got {self.num_through_lanes!r}"))
        if not self.approach_length > 0:
            out.append(("approach_length", f"must be > 0, got {self.approach_length!r}"))
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or self.seed < 0:
            out.append(("seed", f"must be a non-negative integer, got {self.seed!r}"))
        out += [(f"controller.{p}", m) for p, m in self.controller.problems()]
        out += [(f"noise.{p}", m) for p, m in self.noise.problems()]
        for k in KINDS:
            if k not in self.vehicle_classes:
                out.append((f"vehicle_classes.{k.value}", "missing"))
        return out

    def validate(self) -> ScenarioConfig:
        problems = self.problems()
        if problems:
            raise ScenarioValidationError(problems)
        return self


def _weight_problems(path: str, weights: Mapping, keys: tuple) -> list[tuple[str, str]]:
    out = []
    for k in keys:
        w = weights.get(k)
        if w is None:
            out.append((f"{path}.{k.value}", "missing"))
        elif not 0.0 <= w <= 1.0:
            out.append((f"{path}.{k.value}", f"must be a probability in [0, 1], got {w!r}"))
    total = math.fsum(weights.values())
    if abs(total - 1.0) > WEIGHT_TOL:
        out.append((path, f"weights must sum to 1, got {total!r}"))
    return out


# --- file format -----------------------------------------------------------

_CONTROLLER_FIELDS = {f.name for f in fields(ControllerConfig)}
_CLASS_FIELDS = ("length", "cruise_speed", "avg_cross_time")
_TOP_FIELDS = {
    "schema_version", "name", "duration", "seed", "p_arrival", "arrival_weights", "class_mix",
    "turn_probability", "num_through_lanes", "approach_length", "controller", "noise", "vehicle_classes",
}


def _number(raw: Any, path: str, problems: list, *, integer: bool = False) -> Any:
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        problems.append((path, f"expected a number, got {raw!r}"))
        return None
    if integer:
        if isinstance(raw, float) and not raw.is_integer():
            problems.append((path, f"expected an integer, got {raw!r}"))
            return None
        return int(raw)
    return float(raw)


def _keyed(raw: Any, path: str, enum_type, problems: list, default: Mapping | None = None) -> dict | None:
    """Read a mapping keyed by enum value (or a list in canonical order)."""
    order = tuple(enum_type)
    if isinstance(raw, (list, tuple)):
        if len(raw) != len(order):
            problems.append((path, f"expected {len(order)} values in order {[e.value for e in order]}, got {len(raw)}"))
            return None
        raw = {e.value: v for e, v in zip(order, raw)}
    if not isinstance(raw, Mapping):
        problems.append((path, f"expected a mapping, got {type(raw).__name__}"))
        return None
    out = dict(default) if default is not None else {}
    for key, value in raw.items():
        try:
            member = enum_type(key)
        except ValueError:
            problems.append((f"{path}.{key}", f"unknown key; expected one of {[e.value for e in order]}"))
            continue
        num = _number(value, f"{path}.{key}", problems)
        if num is not None:
            out[member] = num
    return out


def scenario_from_dict(data: Any, *, default_name: str = "scenario") -> ScenarioConfig:
    """Build and validate a scenario from parsed YAML, collecting every problem."""
    if not isinstance(data, Mapping):
        raise ScenarioValidationError([("<root>", f"expected a mapping, got {type(data).__name__}")])
    problems: list[tuple[str, str]] = []
    for key in data:
        if key not in _TOP_FIELDS:
            problems.append((str(key), "unknown field"))
    version = data.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        problems.append(("schema_version", f"unsupported version {version!r}; expected {SCHEMA_VERSION}"))

    kw: dict[str, Any] = {}
    name = data.get("name", default_name)
    if not isinstance(name, str):
        problems.append(("name", f"expected text, got {name!r}"))
    kw["name"] = str(name)

    if "arrival_weights" not in data:
        problems.append(("arrival_weights", "required field missing"))
    else:
        kw["arrival_weights"] = _keyed(data["arrival_weights"], "arrival_weights", Direction, problems)
    if "class_mix" in data:
        kw["class_mix"] = _keyed(data["class_mix"], "class_mix", VehicleKind, problems)

    for key in ("duration", "p_arrival", "turn_probability", "approach_length"):
        if key in data:
            kw[key] = _number(data[key], key, problems)
    for key in ("seed", "num_through_lanes"):
        if key in data:
            kw[key] = _number(data[key], key, problems, integer=True)

    if "controller" in data:
        raw = data["controller"]
        if not isinstance(raw, Mapping):
            problems.append(("controller", f"expected a mapping, got {type(raw).__name__}"))
        else:
            ckw = {}
            for key, value in raw.items():
                if key not in _CONTROLLER_FIELDS:
                    problems.append((f"controller.{key}", "unknown field"))
                    continue
                ckw[key] = _number(value, f"controller.{key}", problems, integer=(key == "no_of_lanes"))
            kw["controller"] = ControllerConfig(**{k: v for k, v in ckw.items() if v is not None})

    if "noise" in data:
        raw = data["noise"]
        if not isinstance(raw, Mapping):
            problems.append(("noise", f"expected a mapping, got {type(raw).__name__}"))
        else:
            identity = NoiseParams()
            nkw = {}
            for key in raw:
                if key not in ("detect_prob", "false_per_snapshot"):
                    problems.append((f"noise.{key}", "unknown field"))
            for key in ("detect_prob", "false_per_snapshot"):
                if key in raw:
                    nkw[key] = _keyed(raw[key], f"noise.{key}", VehicleKind, problems, getattr(identity, key))
            kw["noise"] = NoiseParams(**{k: v for k, v in nkw.items() if v is not None})

    if "vehicle_classes" in data:
        raw = data["vehicle_classes"]
        classes = dict(DEFAULT_CLASSES)
        if not isinstance(raw, Mapping):
            problems.append(("vehicle_classes", f"expected a mapping, got {type(raw).__name__}"))
            raw = {}
        for key, spec in raw.items():
            path = f"vehicle_classes.{key}"
            try:
                kind = VehicleKind(key)
            except ValueError:
                problems.append((path, "unknown vehicle class"))
                continue
            if not isinstance(spec, Mapping):
                problems.append((path, f"expected a mapping, got {type(spec).__name__}"))
                continue
            base = classes[kind]
            values = {f: getattr(base, f) for f in _CLASS_FIELDS}
            for f, v in spec.items():
                if f not in _CLASS_FIELDS:
                    problems.append((f"{path}.{f}", "unknown field"))
                    continue
                num = _number(v, f"{path}.{f}", problems)
                if num is not None:
                    values[f] = num
            try:
                classes[kind] = VehicleClass(kind, **values)
            except ValueError as exc:
                problems.append((path, str(exc)))
        kw["vehicle_classes"] = classes

    if problems:
        raise ScenarioValidationError(problems)
    return ScenarioConfig(**{k: v for k, v in kw.items() if v is not None}).validate()


def scenario_to_dict(s: ScenarioConfig) -> dict[str, Any]:
    c = s.controller
    return {
        "schema_version": SCHEMA_VERSION,
        "name": s.name,
        "duration": s.duration,
        "seed": s.seed,
        "p_arrival": s.p_arrival,
        "arrival_weights": {d.value: s.arrival_weights[d] for d in DIRECTIONS},
        "class_mix": {k.value: s.class_mix[k] for k in KINDS},
        "turn_probability": s.turn_probability,
        "num_through_lanes": s.num_through_lanes,
        "approach_length": s.approach_length,
        "controller": {f.name: getattr(c, f.name) for f in fields(ControllerConfig)},
        "noise": {
            "detect_prob": {k.value: s.noise.detect_prob[k] for k in KINDS},
            "false_per_snapshot": {k.value: s.noise.false_per_snapshot[k] for k in KINDS},
        },
        "vehicle_classes": {
            k.value: {f: getattr(s.vehicle_classes[k], f) for f in _CLASS_FIELDS} for k in KINDS
        },
    }


def dump_scenario(s: ScenarioConfig) -> str:
    return yaml.safe_dump(scenario_to_dict(s), sort_keys=False)


def parse_scenario(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ScenarioFileError(f"{path}: scenario file not found") from None
    except OSError as exc:
        raise ScenarioFileError(f"{path}: cannot read scenario file ({exc.strerror})") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioSyntaxError(f"{path}: malformed YAML: {exc}") from None
    return scenario_from_dict(data, default_name=path.stem)
