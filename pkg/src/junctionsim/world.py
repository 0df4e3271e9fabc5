"""Fixed-timestep simulation of one four-way signalised intersection.

Each approach has ``num_through_lanes`` through lanes plus one rightmost
lane from which vehicles may turn.  Vehicles travel a 1-D axis: they spawn
at 0, the stop line sits at ``approach_length`` and they leave the world a
little past the far side of the junction (further for turners, whose turn
path is longer).

Motion is constant cruise speed under a hard spacing constraint.  Queued
vehicles discharge through the stop line one at a time per lane: after a
vehicle crosses, its lane stays blocked for that vehicle's
``avg_cross_time``.  That per-class service time is the same quantity the
adaptive controller uses to size greens.
"""

from __future__ import annotations

import bisect
import itertools
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .scenario import ScenarioConfig
from .signals import DT, Color, PhasePlan
from .trace import EventTrace
from .vehicles import DIRECTIONS, KINDS, Direction, Vehicle, VehicleKind, VehicleState

MIN_GAP = 1.0
JUNCTION_DEPTH = 30.0  # stop line to exit for through traffic
TURN_EXTRA = 15.0  # additional path length for turning vehicles


class InvariantViolation(RuntimeError):
    def __init__(self, tick: int, message: str):
        self.tick = tick
        super().__init__(f"tick {tick}: {message}")


@lru_cache(maxsize=256)
def _cumulative(weights: tuple[float, ...]) -> tuple[tuple[float, ...], int]:
    cum = tuple(itertools.accumulate(weights))
    last_positive = max(i for i, w in enumerate(weights) if w > 0)
    return cum, last_positive


def _pick(weights: tuple[float, ...], u: float) -> int:
    cum, last_positive = _cumulative(weights)
    return min(bisect.bisect_right(cum, u), last_positive)


@dataclass
class WorldState:
    scenario: ScenarioConfig
    rng: np.random.Generator
    trace: EventTrace | None = None
    dt: float = DT
    tick: int = 0
    next_id: int = 0
    lanes: dict[Direction, list[list[Vehicle]]] = field(init=False)
    lane_free_tick: dict[Direction, list[int]] = field(init=False)
    spawned_count: dict[Direction, int] = field(init=False)
    crossed_count: dict[Direction, int] = field(init=False)
    exited_count: dict[Direction, int] = field(init=False)
    suppressed_count: dict[Direction, int] = field(init=False)
    wait_ticks: int = 0  # summed spawn-to-cross ticks over crossed vehicles

    def __post_init__(self) -> None:
        n = self.scenario.num_lanes
        self.lanes = {d: [[] for _ in range(n)] for d in DIRECTIONS}
        self.lane_free_tick = {d: [0] * n for d in DIRECTIONS}
        self.spawned_count = dict.fromkeys(DIRECTIONS, 0)
        self.crossed_count = dict.fromkeys(DIRECTIONS, 0)
        self.exited_count = dict.fromkeys(DIRECTIONS, 0)
        self.suppressed_count = dict.fromkeys(DIRECTIONS, 0)

    @property
    def clock(self) -> float:
        return self.tick * self.dt

    @property
    def stop_line(self) -> float:
        return self.scenario.approach_length

    @property
    def rightmost_lane(self) -> int:
        return self.scenario.num_lanes - 1

    def vehicles(self, approach: Direction | None = None):
        for d in DIRECTIONS if approach is None else (approach,):
            for lane in self.lanes[d]:
                yield from lane

    def waiting_counts(self, approach: Direction) -> dict[VehicleKind, int]:
        return waiting_counts(self, approach)


def waiting_counts(world: WorldState, approach: Direction) -> dict[VehicleKind, int]:
    """Per-class count of vehicles on ``approach`` that have not crossed yet."""
    counts = dict.fromkeys(KINDS, 0)
    moving = VehicleState.MOVING
    for lane in world.lanes[approach]:
        for v in lane:
            if v.state is moving:
                counts[v.vclass.kind] += 1
    return counts


def spawn_step(world: WorldState, scenario: ScenarioConfig) -> list[Vehicle]:
    """Bernoulli arrival for this tick.

    Five uniforms are drawn every tick whether or not a vehicle arrives, so
    the arrival stream depends only on the seed, never on the controller.
    """
    u_arrive, u_dir, u_kind, u_lane, u_turn = world.rng.random(5)
    if u_arrive >= scenario.p_arrival:
        return []
    d = DIRECTIONS[_pick(tuple(scenario.arrival_weights[x] for x in DIRECTIONS), u_dir)]
    kind = KINDS[_pick(tuple(scenario.class_mix[k] for k in KINDS), u_kind)]
    vclass = scenario.vehicle_classes[kind]
    n_lanes = scenario.num_lanes
    lane_index = min(int(u_lane * n_lanes), n_lanes - 1)
    will_turn = bool(lane_index == n_lanes - 1 and u_turn < scenario.turn_probability)

    lane = world.lanes[d][lane_index]
    if lane:
        tail = lane[-1]
        if tail.position - tail.vclass.length - MIN_GAP < 0.0:
            world.suppressed_count[d] += 1
            if world.trace is not None:
                world.trace.emit(world.tick, "suppress", None, d.value, kind.value, lane=lane_index)
            return []

    exit_position = scenario.approach_length + JUNCTION_DEPTH + (TURN_EXTRA if will_turn else 0.0)
    v = Vehicle(world.next_id, vclass, d, lane_index, 0.0, will_turn, world.tick, exit_position)
    world.next_id += 1
    lane.append(v)
    world.spawned_count[d] += 1
    if world.trace is not None:
        world.trace.emit(world.tick, "spawn", v.id, d.value, kind.value, lane=lane_index, will_turn=will_turn)
    return [v]


def motion_step(world: WorldState, signals: PhasePlan, dt: float = DT) -> WorldState:
    """Advance every vehicle by one tick, then advance the clock.

    Lanes are processed front to back so each follower sees its leader's
    updated position.  A vehicle short of the stop line may pass it only
    under Green and only once the lane's discharge headway has elapsed;
    otherwise it stops on the line.  Yellow is treated as Red for such
    vehicles.  Vehicles already past the line are unaffected by signals.
    """
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt!r}")
    tick = world.tick
    stop = world.stop_line
    trace = world.trace
    moving, crossed, exited = VehicleState.MOVING, VehicleState.CROSSED, VehicleState.EXITED
    inf = float("inf")
    for d in DIRECTIONS:
        green = signals.signals[d].color is Color.GREEN
        free = world.lane_free_tick[d]
        for li, lane in enumerate(world.lanes[d]):
            if not lane:
                continue
            limit = inf
            any_exit = False
            for v in lane:
                vc = v.vclass
                old = v.position
                new = old + vc.cruise_speed * dt
                if new > limit:
                    new = limit
                if v.state is moving and new > stop:
                    if green and tick >= free[li]:
                        v.state = crossed
                        v.cross_tick = tick
                        free[li] = tick + round(vc.avg_cross_time / dt)
                        world.crossed_count[d] += 1
                        world.wait_ticks += tick - v.spawn_tick
                        if trace is not None:
                            trace.emit(tick, "cross", v.id, d.value, vc.kind.value)
                    else:
                        new = stop
                if new < old:
                    new = old
                v.speed = (new - old) / dt
                v.position = new
                if new >= v.exit_position:
                    v.state = exited
                    any_exit = True
                    world.exited_count[d] += 1
                    if trace is not None:
                        trace.emit(tick, "exit", v.id, d.value, vc.kind.value)
                limit = new - vc.length - MIN_GAP
            if any_exit:
                lane[:] = [v for v in lane if v.state is not exited]
    world.tick += 1
    return world


def check_invariants(world: WorldState) -> None:
    """Raise :class:`InvariantViolation` on the first broken world invariant."""
    tick = world.tick
    for d in DIRECTIONS:
        live = 0
        for li, lane in enumerate(world.lanes[d]):
            live += len(lane)
            for lead, follow in zip(lane, lane[1:]):
                gap = lead.position - follow.position
                need = lead.vclass.length + MIN_GAP
                if gap < need - 1e-9:
                    raise InvariantViolation(
                        tick, f"overlap on {d.value} lane {li}: vehicles {lead.id}/{follow.id} gap {gap:.3f} < {need}"
                    )
            for v in lane:
                if v.will_turn and li != world.rightmost_lane:
                    raise InvariantViolation(tick, f"turning vehicle {v.id} in non-rightmost lane {li}")
                if v.state is VehicleState.MOVING and v.position > world.stop_line + 1e-9:
                    raise InvariantViolation(tick, f"vehicle {v.id} past the stop line without crossing")
        if world.spawned_count[d] != world.exited_count[d] + live:
            raise InvariantViolation(
                tick,
                f"conservation on {d.value}: spawned {world.spawned_count[d]} != "
                f"exited {world.exited_count[d]} + live {live}",
            )
        if world.crossed_count[d] < world.exited_count[d]:
            raise InvariantViolation(tick, f"{d.value}: more exits than crossings")
