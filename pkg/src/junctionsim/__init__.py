"""Four-way signalised intersection microsimulator with fixed-time and
count-adaptive signal control."""

from .detection import DetectionSnapshot, NoiseParams, apply_noise, ground_truth
from .experiment import (
    ComparisonReport,
    RunResult,
    improvement_percent,
    run_comparison,
    run_simulation,
)
from .scenario import ScenarioConfig, parse_scenario
from .signals import (
    Color,
    ControllerConfig,
    ControllerKind,
    PhasePlan,
    advance,
    capture_instant,
    clamped_green_time,
    controller_tick,
    initial_plan,
    raw_green_time,
)
from .vehicles import DEFAULT_CLASSES, Direction, VehicleClass, VehicleKind
from .world import WorldState, motion_step, spawn_step, waiting_counts

__version__ = "0.1.0"
