"""
Trajectory resampling

Moves a recorded state sequence from the simulation step to the CommonRoad
step. Integer step ratios pick every r-th state unchanged; other ratios
interpolate linearly, headings along the shortest arc.
"""

from dataclasses import replace
from typing import List, Sequence

import numpy as np
from scipy.interpolate import interp1d

from src.errors import EmptyTrajectory
from src.opendrive.geometry import normalize_angle
from src.simulation.state import EntityState

RATIO_TOLERANCE = 1e-9


def integer_ratio(dt_in: float, dt_out: float) -> int:
    """dt_out / dt_in when it is a whole number, else 0."""
    ratio = dt_out / dt_in
    nearest = round(ratio)
    if nearest >= 1 and abs(ratio - nearest) <= RATIO_TOLERANCE * max(1.0, ratio):
        return int(nearest)
    return 0


def resample_trajectory(states: Sequence[EntityState], dt_in: float, dt_out: float) -> List[EntityState]:
    """
    Resample states recorded every `dt_in` seconds to every `dt_out` seconds.

    Output frames are renumbered 0, 1, ... in the new step; a final partial
    interval is dropped.

    Raises:
        EmptyTrajectory: no input states
    """
    if not states:
        raise EmptyTrajectory("cannot resample an empty trajectory")
    if dt_in <= 0 or dt_out <= 0:
        raise ValueError(f"time steps must be positive, got {dt_in} and {dt_out}")

    ratio = integer_ratio(dt_in, dt_out)
    if ratio:
        return [replace(state, frame=k) for k, state in enumerate(states[::ratio])]

    if len(states) == 1:
        return [replace(states[0], frame=0)]

    times = np.array([(s.frame - states[0].frame) * dt_in for s in states])
    count = int(np.floor(times[-1] / dt_out + RATIO_TOLERANCE)) + 1
    targets = np.arange(count) * dt_out
    targets[-1] = min(targets[-1], times[-1])

    columns = np.array([
        [s.x for s in states],
        [s.y for s in states],
        np.unwrap([s.h for s in states]),
        [s.speed for s in states],
        [s.wheel_angle for s in states],
    ])
    values = interp1d(times, columns, kind="linear", axis=1, assume_sorted=True)(targets)
    return [
        EntityState(frame=k, x=float(x), y=float(y), h=normalize_angle(float(h)),
                    speed=float(v), wheel_angle=float(w))
        for k, (x, y, h, v, w) in enumerate(values.T)
    ]
