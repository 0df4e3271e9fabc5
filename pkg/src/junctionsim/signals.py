"""Four-signal phase state machine with fixed-time and adaptive controllers.

One approach holds Green (then Yellow) at a time while the other three are
Red; service rotates through ``cycle_order``.  The adaptive controller
captures a detection snapshot of the *next* approach ``detection_lead``
seconds before the current green ends, turns it into a green duration
(weighted count of waiting vehicles per class, divided by lanes + 1,
rounded and clamped) and stages it for the upcoming switch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable, Mapping

from .detection import DetectionSnapshot
from .vehicles import DIRECTIONS, Direction, VehicleKind

DT = 0.1
_EPS = 1e-9


class Color(str, Enum):
    RED = "Red"
    YELLOW = "Yellow"
    GREEN = "Green"


class ControllerKind(str, Enum):
    STATIC = "static"
    ADAPTIVE = "adaptive"


class ControllerError(RuntimeError):
    """Raised when the phase state machine is driven outside its contract."""


@dataclass(frozen=True)
class SignalState:
    color: Color
    remaining: float | None  # None: red countdown not yet determined ("pending")


@dataclass(frozen=True)
class ControllerConfig:
    default_green: float = 20.0
    yellow_time: float = 5.0
    min_green: float = 10.0
    max_green: float = 60.0
    static_green: float = 30.0
    detection_lead: float = 5.0
    no_of_lanes: int = 2

    def problems(self) -> list[tuple[str, str]]:
        """Return ``(field, message)`` for every violated invariant."""
        out = []
        for name in ("default_green", "yellow_time", "static_green"):
            if not getattr(self, name) > 0:
                out.append((name, f"must be > 0, got {getattr(self, name)!r}"))
        if not self.min_green > 0:
            out.append(("min_green", f"must be > 0, got {self.min_green!r}"))
        if self.min_green > self.max_green:
            out.append(("min_green", f"min_green ({self.min_green}) exceeds max_green ({self.max_green})"))
        if self.detection_lead < 0:
            out.append(("detection_lead", f"must be >= 0, got {self.detection_lead!r}"))
        elif self.detection_lead > self.min_green:
            out.append(
                ("detection_lead", f"detection_lead ({self.detection_lead}) exceeds min_green ({self.min_green})")
            )
        if isinstance(self.no_of_lanes, bool) or not isinstance(self.no_of_lanes, int) or self.no_of_lanes < 1:
            out.append(("no_of_lanes", f"must be an integer >= 1, got {self.no_of_lanes!r}"))
        return out


@dataclass(frozen=True)
class SignalCommand:
    """A colour change, as written to the event trace."""

    tick: int
    direction: Direction
    color: Color
    duration: float | None


@dataclass(frozen=True)
class PhasePlan:
    signals: Mapping[Direction, SignalState]
    current: Direction
    cycle_order: tuple[Direction, ...] = DIRECTIONS
    next_green_duration: float | None = None
    kind: ControllerKind = ControllerKind.ADAPTIVE

    def color(self, direction: Direction) -> Color:
        return self.signals[direction].color

    @property
    def active(self) -> SignalState:
        return self.signals[self.current]

    def next_direction(self, steps: int = 1) -> Direction:
        i = self.cycle_order.index(self.current)
        return self.cycle_order[(i + steps) % len(self.cycle_order)]


def raw_green_time(
    counts: Mapping[VehicleKind, int],
    avg_cross_time: Mapping[VehicleKind, float],
    no_of_lanes: int,
) -> float:
    """Weighted vehicle count over ``no_of_lanes + 1``.

    >>> raw_green_time({VehicleKind.CAR: 1}, {VehicleKind.CAR: 2.0}, 1)
    1.0
    """
    total = 0.0
    for kind, n in counts.items():
        if n:
            total += n * avg_cross_time[kind]
    return total / (no_of_lanes + 1)


def round_half_up(x: float) -> float:
    return float(math.floor(x + 0.5))


def clamped_green_time(raw: float, config: ControllerConfig) -> float:
    # Rounded before clamping so the result never leaves [min_green, max_green]
    # even when the bounds themselves are fractional.
    return min(max(round_half_up(raw), config.min_green), config.max_green)


def capture_instant(green_remaining: float, config: ControllerConfig) -> float:
    """Seconds until the next approach should be photographed."""
    return max(green_remaining - config.detection_lead, 0.0)


def _fallback_green(kind: ControllerKind, config: ControllerConfig) -> float:
    return config.static_green if kind is ControllerKind.STATIC else config.default_green


def _refresh_red_timers(plan: PhasePlan, config: ControllerConfig) -> PhasePlan:
    """Set every Red signal's countdown to the time until its own next Green."""
    active = plan.active
    ahead = active.remaining + (config.yellow_time if active.color is Color.GREEN else 0.0)
    signals = dict(plan.signals)
    for k in range(1, len(plan.cycle_order)):
        d = plan.next_direction(k)
        signals[d] = SignalState(Color.RED, None if ahead is None else round(ahead, 6))
        if ahead is None:
            continue
        if plan.kind is ControllerKind.STATIC:
            ahead += config.static_green + config.yellow_time
        elif k == 1 and plan.next_green_duration is not None:
            ahead += plan.next_green_duration + config.yellow_time
        else:
            ahead = None
    return replace(plan, signals=signals)


def initial_plan(
    config: ControllerConfig,
    kind: ControllerKind = ControllerKind.ADAPTIVE,
    cycle_order: tuple[Direction, ...] = DIRECTIONS,
) -> PhasePlan:
    if sorted(cycle_order) != sorted(DIRECTIONS):
        raise ValueError(f"cycle_order must be a permutation of all four directions, got {cycle_order}")
    first = cycle_order[0]
    signals = {d: SignalState(Color.RED, None) for d in cycle_order}
    signals[first] = SignalState(Color.GREEN, _fallback_green(kind, config))
    plan = PhasePlan(signals=signals, current=first, cycle_order=tuple(cycle_order), kind=kind)
    return _refresh_red_timers(plan, config)


def advance(plan: PhasePlan, config: ControllerConfig, staged_green: float | None = None) -> PhasePlan:
    """Perform the transition due when the active timer has run out.

    Green goes to Yellow; Yellow goes to Red and hands Green to the next
    direction in ``cycle_order`` for ``staged_green`` seconds (falling back
    to the controller's default when nothing was staged).
    """
    active = plan.active
    if active.remaining > _EPS:
        raise ControllerError(
            f"advance() called with {plan.current.value} {active.color.value} still at {active.remaining:.3f} s"
        )
    signals = dict(plan.signals)
    if active.color is Color.GREEN:
        signals[plan.current] = SignalState(Color.YELLOW, config.yellow_time)
        new = replace(plan, signals=signals)
    elif active.color is Color.YELLOW:
        nxt = plan.next_direction()
        if plan.kind is ControllerKind.STATIC:
            staged_green = None  # fixed-time ignores any detector input
        elif staged_green is None:
            staged_green = plan.next_green_duration
        if staged_green is None:
            staged_green = _fallback_green(plan.kind, config)
        signals[plan.current] = SignalState(Color.RED, None)
        signals[nxt] = SignalState(Color.GREEN, staged_green)
        new = replace(plan, signals=signals, current=nxt, next_green_duration=None)
    else:
        raise ControllerError(f"active direction {plan.current.value} is Red")
    return _refresh_red_timers(new, config)


Detector = Callable[[Direction, int], DetectionSnapshot]


def controller_tick(
    plan: PhasePlan,
    config: ControllerConfig,
    tick: int,
    detector: Detector | None,
    avg_cross_time: Mapping[VehicleKind, float],
    dt: float = DT,
) -> tuple[PhasePlan, list[SignalCommand]]:
    """Run the controller for one simulation tick.

    ``plan`` carries the time left at the start of this tick.  First
    (adaptive only) the next approach is captured once the green has
    ``detection_lead`` seconds or less left; then an expired timer is
    advanced; finally the active timer is decremented by ``dt``.  The
    returned plan is the one in force during this tick's motion step.

    Exceptions raised by ``detector`` propagate unchanged.
    """
    active = plan.active
    if (
        plan.kind is ControllerKind.ADAPTIVE
        and active.color is Color.GREEN
        and plan.next_green_duration is None
        and capture_instant(active.remaining, config) <= _EPS
    ):
        if detector is None:
            raise ControllerError("adaptive controller requires a detector")
        snapshot = detector(plan.next_direction(), tick)
        raw = raw_green_time(snapshot.counts, avg_cross_time, config.no_of_lanes)
        plan = replace(plan, next_green_duration=clamped_green_time(raw, config))

    commands: list[SignalCommand] = []
    if active.remaining <= _EPS:
        before = plan.current
        plan = advance(plan, config)
        if plan.current is before:
            commands.append(SignalCommand(tick, before, Color.YELLOW, config.yellow_time))
        else:
            commands.append(SignalCommand(tick, before, Color.RED, None))
            commands.append(SignalCommand(tick, plan.current, Color.GREEN, plan.active.remaining))

    active = plan.active
    signals = dict(plan.signals)
    signals[plan.current] = SignalState(active.color, max(round(active.remaining - dt, 6), 0.0))
    plan = _refresh_red_timers(replace(plan, signals=signals), config)
    return plan, commands


def non_red(plan: PhasePlan) -> list[Direction]:
    return [d for d, s in plan.signals.items() if s.color is not Color.RED]
