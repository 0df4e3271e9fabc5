"""Seeded batch runs comparing fixed-time and adaptive control."""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .detection import DetectionSnapshot, GroundTruthDetector, NoisyDetector
from .scenario import ScenarioConfig
from .signals import (
    Color,
    ControllerKind,
    PhasePlan,
    SignalCommand,
    controller_tick,
    initial_plan,
    non_red,
)
from .trace import EventTrace
from .vehicles import DIRECTIONS, KINDS, Direction
from .world import InvariantViolation, WorldState, check_invariants, motion_step, spawn_step

REGIMES = ("near_equal", "uniform", "skewed")


class RunAborted(RuntimeError):
    def __init__(self, scenario: str, tick: int | None, message: str):
        self.scenario = scenario
        self.tick = tick
        where = f"scenario {scenario!r}" + (f", tick {tick}" if tick is not None else "")
        super().__init__(f"{where}: {message}")


class UndefinedBaselineError(ValueError):
    pass


@dataclass(frozen=True)
class RunResult:
    scenario: str
    controller: ControllerKind
    replication: int
    crossed: Mapping[Direction, int]
    total_crossed: int
    spawned: int
    suppressed_arrivals: int
    mean_wait: float  # seconds, spawn to stop-line crossing, crossed vehicles only
    queue_residue: int  # spawned but not crossed at the end of the run


def run_seed_sequence(scenario: ScenarioConfig, replication: int = 0) -> np.random.SeedSequence:
    return np.random.SeedSequence([scenario.seed, replication])


def _check_plan(plan: PhasePlan, scenario: ScenarioConfig, tick: int) -> None:
    active = non_red(plan)
    if len(active) != 1 or active[0] is not plan.current:
        raise InvariantViolation(tick, f"phase exclusivity broken: non-red signals {[d.value for d in active]}")
    g = plan.next_green_duration
    cfg = scenario.controller
    if g is not None and not cfg.min_green <= g <= cfg.max_green:
        raise InvariantViolation(tick, f"staged green {g} outside [{cfg.min_green}, {cfg.max_green}]")


def run_simulation(
    scenario: ScenarioConfig,
    controller: ControllerKind | str,
    *,
    replication: int = 0,
    trace: EventTrace | None = None,
    check_invariants_every_tick: bool = False,
    detector: str = "auto",
) -> RunResult:
    """Run one controller over one scenario for ``scenario.duration`` seconds.

    ``detector`` selects the adaptive controller's count source:
    ``"ground_truth"``, ``"noisy"`` (applies ``scenario.noise``), or
    ``"auto"`` (noisy unless the noise parameters are the identity).
    Arrivals and detector noise draw from separate child streams of
    ``SeedSequence([seed, replication])``.
    """
    kind = ControllerKind(controller)
    arrival_ss, noise_ss = run_seed_sequence(scenario, replication).spawn(2)
    world = WorldState(scenario, np.random.default_rng(arrival_ss), trace)

    if detector == "auto":
        detector = "ground_truth" if scenario.noise.is_identity else "noisy"
    if detector == "ground_truth":
        source = GroundTruthDetector(world)
    elif detector == "noisy":
        source = NoisyDetector(world, scenario.noise, np.random.default_rng(noise_ss))
    else:
        raise ValueError(f"unknown detector {detector!r}")

    captured: list[DetectionSnapshot] = []

    def detect(approach: Direction, tick: int) -> DetectionSnapshot:
        try:
            snap = source(approach, tick)
        except Exception as exc:
            raise RunAborted(scenario.name, tick, f"detector failure on {approach.value}: {exc}") from exc
        captured.append(snap)
        return snap

    cfg = scenario.controller
    avg_cross_time = scenario.avg_cross_time
    plan = initial_plan(cfg, kind)
    if trace is not None:
        for d in plan.cycle_order:
            s = plan.signals[d]
            trace.emit(0, "signal", None, d.value, None, color=s.color.value,
                       duration=s.remaining if s.color is Color.GREEN else None)

    n_ticks = round(scenario.duration / world.dt)
    try:
        for _ in range(n_ticks):
            tick = world.tick
            spawn_step(world, scenario)
            plan, commands = controller_tick(plan, cfg, tick, detect, avg_cross_time, world.dt)
            if trace is not None:
                _trace_commands(trace, commands)
                for snap in captured:
                    trace.emit(tick, "capture", None, snap.approach.value, None,
                               counts={k.value: snap.counts[k] for k in KINDS}, green=plan.next_green_duration)
            captured.clear()
            if check_invariants_every_tick:
                _check_plan(plan, scenario, tick)
                before = dict(world.crossed_count)
            motion_step(world, plan, world.dt)
            if check_invariants_every_tick:
                for d in DIRECTIONS:
                    if world.crossed_count[d] < before[d]:
                        raise InvariantViolation(tick, f"crossed_count decreased on {d.value}")
                    if world.crossed_count[d] > before[d] and plan.color(d) is not Color.GREEN:
                        raise InvariantViolation(tick, f"crossing on {d.value} under {plan.color(d).value}")
                check_invariants(world)
    except RunAborted:
        raise
    except InvariantViolation as exc:
        raise RunAborted(scenario.name, exc.tick, f"invariant violated: {exc}") from exc

    total = sum(world.crossed_count.values())
    spawned = sum(world.spawned_count.values())
    return RunResult(
        scenario=scenario.name,
        controller=kind,
        replication=replication,
        crossed=dict(world.crossed_count),
        total_crossed=total,
        spawned=spawned,
        suppressed_arrivals=sum(world.suppressed_count.values()),
        mean_wait=world.wait_ticks * world.dt / total if total else 0.0,
        queue_residue=spawned - total,
    )


def _trace_commands(trace: EventTrace, commands: Iterable[SignalCommand]) -> None:
    for c in commands:
        trace.emit(c.tick, "signal", None, c.direction.value, None, color=c.color.value, duration=c.duration)


def improvement_percent(static_total: float, adaptive_total: float) -> float:
    """Relative throughput gain of adaptive over static, in percent.

    >>> improvement_percent(100, 134)
    34.0
    """
    if not static_total > 0:
        raise UndefinedBaselineError(f"static baseline total must be > 0, got {static_total!r}")
    return 100.0 * (adaptive_total - static_total) / static_total


def regime_of(weights: Mapping[Direction, float]) -> str:
    """Classify an arrival distribution as skewed, uniform, near_equal or mixed."""
    w = [weights[d] for d in DIRECTIONS]
    if max(w) >= 0.6:
        return "skewed"
    if all(abs(x - 0.25) <= 1e-9 for x in w):
        return "uniform"
    if all(abs(x - 0.25) <= 0.05 for x in w):
        return "near_equal"
    return "mixed"


@dataclass(frozen=True)
class ComparisonRow:
    scenario: str
    regime: str
    static_mean: float
    adaptive_mean: float
    improvement_percent: float


@dataclass
class ComparisonReport:
    rows: list[ComparisonRow]
    runs: list[RunResult] = field(default_factory=list)

    def summary(self) -> dict[str, float]:
        vals = [r.improvement_percent for r in self.rows]
        return {"mean": sum(vals) / len(vals), "min": min(vals), "max": max(vals)}

    def regime_means(self) -> dict[str, float | None]:
        out: dict[str, float | None] = {}
        for regime in REGIMES:
            vals = [r.improvement_percent for r in self.rows if r.regime == regime]
            out[regime] = sum(vals) / len(vals) if vals else None
        return out

    def row(self, scenario: str) -> ComparisonRow:
        for r in self.rows:
            if r.scenario == scenario:
                return r
        raise KeyError(scenario)


def _job(args: tuple[ScenarioConfig, int, ControllerKind]) -> RunResult:
    scenario, replication, kind = args
    return run_simulation(scenario, kind, replication=replication)


def run_comparison(
    scenarios: Sequence[ScenarioConfig], replications: int = 5, *, workers: int = 1
) -> ComparisonReport:
    """Run both controllers on every scenario x replication with paired seeds."""
    if not scenarios:
        raise ValueError("at least one scenario is required")
    if replications < 1:
        raise ValueError(f"replications must be >= 1, got {replications}")
    names = [s.name for s in scenarios]
    if len(set(names)) != len(names):
        raise ValueError(f"scenario names must be unique, got {names}")

    jobs = [(s, r, k) for s in scenarios for r in range(replications) for k in ControllerKind]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_job, jobs))
    else:
        results = [_job(j) for j in jobs]

    order = {k: i for i, k in enumerate(ControllerKind)}
    results.sort(key=lambda r: (r.scenario, r.replication, order[r.controller]))
    by_scenario = {s.name: s for s in scenarios}
    rows = []
    for name in sorted(by_scenario):
        mine = [r for r in results if r.scenario == name]
        static = math.fsum(r.total_crossed for r in mine if r.controller is ControllerKind.STATIC) / replications
        adaptive = math.fsum(r.total_crossed for r in mine if r.controller is ControllerKind.ADAPTIVE) / replications
        try:
            imp = improvement_percent(static, adaptive)
        except UndefinedBaselineError as exc:
            raise RunAborted(name, None, str(exc)) from exc
        rows.append(ComparisonRow(name, regime_of(by_scenario[name].arrival_weights), static, adaptive, imp))
    return ComparisonReport(rows, results)


# --- output ------------------------------------------------------------------

RUN_COLUMNS = (
    ["scenario", "replication", "controller"]
    + [f"crossed_{d.value.lower()}" for d in DIRECTIONS]
    + ["total", "mean_wait", "spawned", "suppressed_arrivals", "queue_residue"]
)
SUMMARY_COLUMNS = ["scenario", "regime", "static_mean", "adaptive_mean", "improvement_percent"]


def _fmt(x: float) -> str:
    # repr round-trips exactly, so figures recomputed from the CSV match bit for bit.
    return repr(float(x))


def run_row(r: RunResult) -> list[str]:
    return (
        [r.scenario, str(r.replication), r.controller.value]
        + [str(r.crossed[d]) for d in DIRECTIONS]
        + [str(r.total_crossed), _fmt(r.mean_wait), str(r.spawned), str(r.suppressed_arrivals), str(r.queue_residue)]
    )


def write_runs_csv(runs: Iterable[RunResult], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RUN_COLUMNS)
        for r in runs:
            w.writerow(run_row(r))


def write_summary_csv(report: ComparisonReport, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_COLUMNS)
        for row in report.rows:
            w.writerow([row.scenario, row.regime, _fmt(row.static_mean), _fmt(row.adaptive_mean),
                        _fmt(row.improvement_percent)])


def summary_document(report: ComparisonReport, replications: int) -> dict:
    return {
        "replications": replications,
        "scenarios": len(report.rows),
        "improvement_percent": report.summary(),
        "regime_mean_improvement_percent": report.regime_means(),
        "adaptive_not_worse_rows": sum(r.adaptive_mean >= r.static_mean for r in report.rows),
    }


def write_summary_json(report: ComparisonReport, replications: int, path: str | Path) -> None:
    doc = summary_document(report, replications)
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def write_report(report: ComparisonReport, replications: int, out_dir: str | Path) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_runs_csv(report.runs, out / "runs.csv")
    write_summary_csv(report, out / "summary.csv")
    write_summary_json(report, replications, out / "summary.json")
