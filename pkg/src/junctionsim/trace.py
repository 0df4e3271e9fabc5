"""Line-delimited JSON event trace.

Every record is one JSON object on its own line with the keys, in order::

    tick        integer simulation tick (time = tick * 0.1 s)
    event       spawn | suppress | cross | exit | signal | capture
    vehicle_id  integer, or null for non-vehicle events
    approach    Right | Down | Left | Up
    class       Car | Motorcycle | Bus | Truck | Rickshaw, or null

followed by event-specific keys:

    spawn       lane, will_turn
    suppress    lane
    signal      color (Red | Yellow | Green), duration (seconds or null)
    capture     counts (class -> detected count), green (staged seconds)

Records within a tick appear in processing order: arrivals, signal
changes, captures, then vehicle movements by approach, lane and queue
position.  The byte stream is a deterministic function of scenario, seed
and controller.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Iterable

TRACE_VERSION = 1


class EventTrace:
    def __init__(self) -> None:
        self.records: list[dict[str, Any]] = []

    def emit(self, tick: int, event: str, vehicle_id: int | None, approach: str, vclass: str | None, **extra) -> None:
        rec = {"tick": tick, "event": event, "vehicle_id": vehicle_id, "approach": approach, "class": vclass}
        rec.update(extra)
        self.records.append(rec)

    def of_kind(self, *kinds: str) -> list[dict[str, Any]]:
        return [r for r in self.records if r["event"] in kinds]

    def lines(self) -> Iterable[str]:
        for rec in self.records:
            yield json.dumps(rec, separators=(",", ":"))

    def dumps(self) -> str:
        return "".join(line + "\n" for line in self.lines())

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8", newline="\n")


def read_trace(path: str | Path) -> list[dict[str, Any]]:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]
