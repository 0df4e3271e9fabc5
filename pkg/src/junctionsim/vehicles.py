"""Vehicle classes, approach directions and the per-vehicle record."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class Direction(str, Enum):
    """Travel direction of an approach through the intersection."""

    RIGHT = "Right"
    DOWN = "Down"
    LEFT = "Left"
    UP = "Up"


DIRECTIONS: tuple[Direction, ...] = (Direction.RIGHT, Direction.DOWN, Direction.LEFT, Direction.UP)


class VehicleKind(str, Enum):
    CAR = "Car"
    MOTORCYCLE = "Motorcycle"
    BUS = "Bus"
    TRUCK = "Truck"
    RICKSHAW = "Rickshaw"


KINDS: tuple[VehicleKind, ...] = tuple(VehicleKind)


@dataclass(frozen=True)
class VehicleClass:
    """Physical and timing parameters of one vehicle class.

    ``avg_cross_time`` is the per-vehicle service time used both by the
    green-time formula and by the stop-line discharge headway in the
    simulator, so the controller's estimate and the simulated queue
    discharge share one calibration input.
    """

    kind: VehicleKind
    length: float
    cruise_speed: float
    avg_cross_time: float

    def __post_init__(self) -> None:
        for name in ("length", "cruise_speed", "avg_cross_time"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{self.kind.value}.{name} must be > 0, got {getattr(self, name)!r}")


# Calibration inputs, not measured values.
DEFAULT_CLASSES: dict[VehicleKind, VehicleClass] = {
    VehicleKind.CAR: VehicleClass(VehicleKind.CAR, 4.0, 12.0, 2.0),
    VehicleKind.MOTORCYCLE: VehicleClass(VehicleKind.MOTORCYCLE, 2.0, 13.0, 1.0),
    VehicleKind.BUS: VehicleClass(VehicleKind.BUS, 10.0, 9.0, 2.5),
    VehicleKind.TRUCK: VehicleClass(VehicleKind.TRUCK, 10.0, 9.0, 2.5),
    VehicleKind.RICKSHAW: VehicleClass(VehicleKind.RICKSHAW, 3.0, 10.0, 2.25),
}


class VehicleState(str, Enum):
    MOVING = "Moving"  # includes queued at the stop line
    CROSSED = "Crossed"
    EXITED = "Exited"


@dataclass(slots=True)
class Vehicle:
    id: int
    vclass: VehicleClass
    approach: Direction
    lane_index: int
    position: float  # front bumper, metres from the spawn edge
    will_turn: bool
    spawn_tick: int
    exit_position: float
    speed: float = 0.0
    state: VehicleState = VehicleState.MOVING
    cross_tick: int | None = None

    @property
    def kind(self) -> VehicleKind:
        return self.vclass.kind
