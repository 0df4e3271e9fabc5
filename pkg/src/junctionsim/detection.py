"""Vehicle-count providers feeding the adaptive controller.

A real deployment would put a camera + object-detector pipeline behind the
same interface: anything that maps ``(approach, tick)`` to a
:class:`DetectionSnapshot` can drive the controller.  Two providers ship
here: exact counts read from the simulator, and a noisy wrapper that thins
true vehicles (Bernoulli per vehicle) and adds Poisson false positives.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Mapping

import numpy as np

from .vehicles import KINDS, Direction, VehicleKind

if TYPE_CHECKING:
    from .world import WorldState


@dataclass(frozen=True)
class DetectionSnapshot:
    approach: Direction
    tick: int
    counts: Mapping[VehicleKind, int]

    def __post_init__(self) -> None:
        missing = [k.value for k in KINDS if k not in self.counts]
        if missing:
            raise ValueError(f"snapshot counts missing classes: {missing}")
        bad = {k.value: n for k, n in self.counts.items() if n < 0}
        if bad:
            raise ValueError(f"snapshot counts must be non-negative: {bad}")


def _filled(value: float) -> dict[VehicleKind, float]:
    return {k: value for k in KINDS}


@dataclass(frozen=True)
class NoiseParams:
    detect_prob: Mapping[VehicleKind, float] = field(default_factory=lambda: _filled(1.0))
    false_per_snapshot: Mapping[VehicleKind, float] = field(default_factory=lambda: _filled(0.0))

    @classmethod
    def identity(cls) -> NoiseParams:
        return cls()

    @property
    def is_identity(self) -> bool:
        return all(self.detect_prob[k] == 1.0 for k in KINDS) and all(
            self.false_per_snapshot[k] == 0.0 for k in KINDS
        )

    def problems(self) -> list[tuple[str, str]]:
        out = []
        for k in KINDS:
            p = self.detect_prob.get(k)
            if p is None or not 0.0 <= p <= 1.0:
                out.append((f"detect_prob.{k.value}", f"must be a probability in [0, 1], got {p!r}"))
            lam = self.false_per_snapshot.get(k)
            if lam is None or not lam >= 0.0:
                out.append((f"false_per_snapshot.{k.value}", f"must be >= 0, got {lam!r}"))
        return out


def ground_truth(world: WorldState, approach: Direction) -> DetectionSnapshot:
    return DetectionSnapshot(approach, world.tick, world.waiting_counts(approach))


def apply_noise(snapshot: DetectionSnapshot, params: NoiseParams, rng: np.random.Generator) -> DetectionSnapshot:
    """Thin each class count binomially, then add Poisson spurious detections.

    Draws happen in fixed class order, one binomial and one Poisson per
    class, so the generator advances identically for every snapshot.
    """
    counts = {}
    for k in KINDS:
        kept = int(rng.binomial(snapshot.counts[k], params.detect_prob[k]))
        counts[k] = kept + int(rng.poisson(params.false_per_snapshot[k]))
    return DetectionSnapshot(snapshot.approach, snapshot.tick, counts)


class GroundTruthDetector:
    def __init__(self, world: WorldState):
        self.world = world

    def __call__(self, approach: Direction, tick: int) -> DetectionSnapshot:
        return ground_truth(self.world, approach)


class NoisyDetector:
    def __init__(self, world: WorldState, params: NoiseParams, rng: np.random.Generator):
        self.world = world
        self.params = params
        self.rng = rng

    def __call__(self, approach: Direction, tick: int) -> DetectionSnapshot:
        return apply_noise(ground_truth(self.world, approach), self.params, self.rng)
