import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from junctionsim.signals import Color, ControllerConfig, PhasePlan, SignalState, initial_plan
from junctionsim.vehicles import DEFAULT_CLASSES, DIRECTIONS, KINDS, Direction, Vehicle, VehicleKind, VehicleState
from junctionsim.world import (
    MIN_GAP,
    WorldState,
    check_invariants,
    motion_step,
    spawn_step,
    waiting_counts,
)

from conftest import make_scenario

CAR = DEFAULT_CLASSES[VehicleKind.CAR]
BUS = DEFAULT_CLASSES[VehicleKind.BUS]


def all_colored(color, current=Direction.RIGHT):
    signals = {d: SignalState(Color.RED, None) for d in DIRECTIONS}
    signals[current] = SignalState(color, 10.0)
    return PhasePlan(signals=signals, current=current)


def world_for(scenario, seed=0):
    return WorldState(scenario, np.random.default_rng(seed))


def place(world, vclass, approach, lane, position, state=VehicleState.MOVING, will_turn=False):
    v = Vehicle(world.next_id, vclass, approach, lane, position, will_turn, world.tick,
                world.stop_line + 30.0)
    v.state = state
    world.next_id += 1
    world.lanes[approach][lane].append(v)
    world.spawned_count[approach] += 1
    if state is VehicleState.CROSSED:
        world.crossed_count[approach] += 1
    return v


class TestSpawn:
    def test_zero_turn_probability(self):
        sc = make_scenario(p_arrival=0.5, turn_probability=0.0)
        world = world_for(sc, 1)
        spawned = []
        for _ in range(2000):
            spawned += spawn_step(world, sc)
            world.lanes = {d: [[] for _ in range(sc.num_lanes)] for d in DIRECTIONS}
        assert spawned and not any(v.will_turn for v in spawned)

    def test_degenerate_weights(self):
        sc = make_scenario((1, 0, 0, 0), p_arrival=0.5, seed=42)
        world = world_for(sc, 42)
        green = all_colored(Color.GREEN)
        seen = set()
        for _ in range(1000):
            seen |= {v.approach for v in spawn_step(world, sc)}
            motion_step(world, green)
        assert seen == {Direction.RIGHT}
        assert sum(world.suppressed_count.values()) + sum(world.spawned_count.values()) > 400

    def test_turners_only_in_rightmost_lane(self):
        sc = make_scenario(p_arrival=1.0, turn_probability=1.0)
        world = world_for(sc, 3)
        for _ in range(500):
            for v in spawn_step(world, sc):
                assert v.will_turn == (v.lane_index == sc.num_lanes - 1)
            world.lanes = {d: [[] for _ in range(sc.num_lanes)] for d in DIRECTIONS}

    def test_matches_independent_sampler(self):
        """Re-sample the same seeded stream with a plain loop and compare."""
        sc = make_scenario(p_arrival=0.5, turn_probability=0.3)
        world = world_for(sc, 2024)
        attempts = dict.fromkeys(DIRECTIONS, 0)
        for _ in range(10_000):
            spawn_step(world, sc)
            world.lanes = {d: [[] for _ in range(sc.num_lanes)] for d in DIRECTIONS}
        for d in DIRECTIONS:
            attempts[d] = world.spawned_count[d] + world.suppressed_count[d]

        rng = np.random.default_rng(2024)
        oracle = dict.fromkeys(DIRECTIONS, 0)
        for _ in range(10_000):
            u = rng.random(5)
            if u[0] < 0.5:
                acc = 0.0
                for d in DIRECTIONS:
                    acc += 0.25
                    if u[1] < acc:
                        oracle[d] += 1
                        break
        assert attempts == oracle
        total = sum(attempts.values())
        for d in DIRECTIONS:
            assert attempts[d] / total == pytest.approx(0.25, abs=0.03)

    def test_suppressed_when_entry_occupied(self):
        sc = make_scenario((1, 0, 0, 0), p_arrival=1.0, num_through_lanes=1)
        world = world_for(sc)
        for lane in range(sc.num_lanes):
            place(world, BUS, Direction.RIGHT, lane, 5.0)
        assert spawn_step(world, sc) == []
        assert world.suppressed_count[Direction.RIGHT] == 1
        check_invariants(world)


class TestMotion:
    def test_unobstructed_advance(self):
        sc = make_scenario()
        world = world_for(sc)
        v = place(world, CAR, Direction.UP, 0, 10.0)
        motion_step(world, all_colored(Color.GREEN, Direction.UP), 0.1)
        assert v.position == pytest.approx(11.2)
        fast = DEFAULT_CLASSES[VehicleKind.CAR].__class__(VehicleKind.CAR, 4.0, 10.0, 2.0)
        w = place(world, fast, Direction.LEFT, 0, 10.0)
        motion_step(world, all_colored(Color.GREEN, Direction.UP), 0.1)
        assert w.position == pytest.approx(11.0)

    @pytest.mark.parametrize("color", [Color.RED, Color.YELLOW])
    def test_halts_at_stop_line(self, color):
        sc = make_scenario()
        world = world_for(sc)
        v = place(world, CAR, Direction.RIGHT, 1, world.stop_line)
        plan = all_colored(color, Direction.RIGHT)
        for _ in range(50):
            motion_step(world, plan, 0.1)
        assert v.position == world.stop_line
        assert world.crossed_count[Direction.RIGHT] == 0

    def test_past_line_ignores_signal(self):
        sc = make_scenario()
        world = world_for(sc)
        v = place(world, CAR, Direction.RIGHT, 0, world.stop_line + 2.0, state=VehicleState.CROSSED)
        motion_step(world, all_colored(Color.RED, Direction.DOWN), 0.1)
        assert v.position == pytest.approx(world.stop_line + 3.2)

    def test_crossing_counted_once_and_exit(self):
        sc = make_scenario()
        world = world_for(sc)
        v = place(world, CAR, Direction.DOWN, 0, world.stop_line - 0.5)
        plan = all_colored(Color.GREEN, Direction.DOWN)
        for _ in range(100):
            motion_step(world, plan, 0.1)
        assert world.crossed_count[Direction.DOWN] == 1
        assert v.state is VehicleState.EXITED
        assert world.exited_count[Direction.DOWN] == 1
        assert not world.lanes[Direction.DOWN][0]

    def test_discharge_headway(self):
        """A queue of cars in one lane leaves one every avg_cross_time seconds."""
        sc = make_scenario()
        world = world_for(sc)
        stop = world.stop_line
        for i in range(4):
            place(world, CAR, Direction.LEFT, 0, stop - i * (CAR.length + MIN_GAP))
        ticks = []
        plan = all_colored(Color.GREEN, Direction.LEFT)
        for t in range(200):
            before = world.crossed_count[Direction.LEFT]
            motion_step(world, plan, 0.1)
            if world.crossed_count[Direction.LEFT] > before:
                ticks.append(t)
        assert ticks == [0, 20, 40, 60]

    def test_turning_vehicle_travels_longer(self):
        sc = make_scenario((1, 0, 0, 0), p_arrival=1.0, turn_probability=1.0, num_through_lanes=1)
        world = world_for(sc, 5)
        plan = all_colored(Color.GREEN, Direction.RIGHT)
        spawned = []
        for _ in range(30):
            spawned += spawn_step(world, sc)
        turner = next(v for v in spawned if v.will_turn)
        straight = next(v for v in spawned if not v.will_turn)
        assert turner.exit_position > straight.exit_position

    @settings(max_examples=60, deadline=None)
    @given(
        st.floats(2.0, 40.0),
        st.sampled_from(KINDS),
        st.sampled_from(KINDS),
        st.integers(1, 400),
    )
    def test_follower_never_closer_than_oracle(self, slack, lead_kind, follow_kind, steps):
        """Compare each tick with the closed-form path of a platoon of two.

        With no stop line in range the leader moves freely and the follower
        takes min(free path, leader path - spacing), exactly.
        """
        sc = make_scenario(approach_length=10_000.0)
        world = world_for(sc)
        lc, fc = DEFAULT_CLASSES[lead_kind], DEFAULT_CLASSES[follow_kind]
        spacing = lc.length + MIN_GAP
        leader = place(world, lc, Direction.UP, 0, 100.0 + spacing + slack)
        follower = place(world, fc, Direction.UP, 0, 100.0)
        xl0, xf0 = leader.position, follower.position
        plan = all_colored(Color.GREEN, Direction.UP)
        for k in range(1, steps + 1):
            motion_step(world, plan, 0.1)
            t = k * 0.1
            expect = min(xf0 + fc.cruise_speed * t, xl0 + lc.cruise_speed * t - spacing)
            assert follower.position == pytest.approx(expect, abs=1e-6)
            assert leader.position - follower.position >= spacing - 1e-9

    def test_rejects_bad_dt(self):
        sc = make_scenario()
        with pytest.raises(ValueError):
            motion_step(world_for(sc), all_colored(Color.GREEN), 0.0)


class TestWaitingCounts:
    def test_empty(self):
        world = world_for(make_scenario())
        assert all(n == 0 for n in waiting_counts(world, Direction.UP).values())

    def test_excludes_crossed(self):
        world = world_for(make_scenario())
        s = world.stop_line
        for i in range(3):
            place(world, CAR, Direction.UP, i, s - 1.0)
        place(world, BUS, Direction.UP, 0, s - 20.0)
        place(world, CAR, Direction.UP, 1, s + 10.0, state=VehicleState.CROSSED)
        place(world, CAR, Direction.UP, 2, s + 10.0, state=VehicleState.CROSSED)
        counts = waiting_counts(world, Direction.UP)
        assert counts == {VehicleKind.CAR: 3, VehicleKind.BUS: 1, VehicleKind.MOTORCYCLE: 0,
                          VehicleKind.TRUCK: 0, VehicleKind.RICKSHAW: 0}

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10_000), st.integers(10, 800))
    def test_matches_brute_force_scan(self, seed, ticks):
        sc = make_scenario((0.4, 0.3, 0.2, 0.1), p_arrival=0.2, seed=seed)
        world = world_for(sc, seed)
        cycle = itertools.cycle(DIRECTIONS)
        plan = all_colored(Color.GREEN, next(cycle))
        for t in range(ticks):
            if t % 97 == 0:
                plan = all_colored(Color.GREEN, next(cycle))
            spawn_step(world, sc)
            motion_step(world, plan)
        everyone = [v for d in DIRECTIONS for lane in world.lanes[d] for v in lane]
        for d in DIRECTIONS:
            expected = {k: 0 for k in KINDS}
            for v in everyone:
                if v.approach is d and v.state is not VehicleState.CROSSED and v.position <= world.stop_line:
                    expected[v.vclass.kind] += 1
            assert waiting_counts(world, d) == expected


def test_clock_is_tick_times_dt():
    sc = make_scenario()
    world = world_for(sc)
    plan = initial_plan(ControllerConfig())
    for _ in range(1234):
        motion_step(world, plan)
    assert world.tick == 1234
    assert world.clock == 1234 * 0.1
