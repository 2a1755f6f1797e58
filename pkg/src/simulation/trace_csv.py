"""Debug dump of a simulation trace: one CSV row per (frame, entity)."""

import csv
from pathlib import Path
from typing import Union

from src.simulation.state import SimulationTrace

COLUMNS = ("frame", "name", "x", "y", "h", "speed", "wheel_angle")


def write_trace_csv(trace: SimulationTrace, path: Union[str, Path]) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(COLUMNS)
        for frame in range(trace.num_frames):
            for name, states in trace.states.items():
                state = states[frame]
                writer.writerow((state.frame, name, f"{state.x:.6f}", f"{state.y:.6f}", f"{state.h:.6f}",
                                 f"{state.speed:.6f}", f"{state.wheel_angle:.6f}"))
    return path
