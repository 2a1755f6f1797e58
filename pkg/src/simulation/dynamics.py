"""
Transition dynamics

Shape functions and duration rules for speed and lane-change transitions,
plus the kinematic helpers the simulator integrates with.
"""

import math
from typing import Optional

import numpy as np

from src.openscenario.model import DynamicsDimension, DynamicsShape, Performance, TransitionDynamics

WHEELBASE_FACTOR = 0.6


def shape_value(shape: DynamicsShape, progress: float) -> float:
    """Fraction of the transition done at `progress` in [0, 1]."""
    p = float(np.clip(progress, 0.0, 1.0))
    if shape is DynamicsShape.STEP:
        return 1.0 if p > 0.0 else 0.0
    if shape is DynamicsShape.LINEAR:
        return p
    if shape is DynamicsShape.CUBIC:
        return 3.0 * p ** 2 - 2.0 * p ** 3
    return 0.5 * (1.0 - math.cos(math.pi * p))


def speed_duration(dynamics: TransitionDynamics, v0: float, v1: float) -> float:
    """
    Duration in seconds of a speed transition from v0 to v1.

    time: the value itself; rate: |v1 - v0| / value; distance: the time the
    mean speed needs to cover the value. A zero value means immediate.
    """
    value = dynamics.value
    if value <= 0.0:
        return 0.0
    if dynamics.dimension is DynamicsDimension.TIME:
        return value
    if dynamics.dimension is DynamicsDimension.RATE:
        return abs(v1 - v0) / value
    mean = 0.5 * (v0 + v1)
    return 2.0 * value / (v0 + v1) if mean > 0 else 0.0


def clamp_speed(current: float, desired: float, dt: float, performance: Optional[Performance],
                limit_rate: bool = True) -> float:
    """Apply acceleration/deceleration limits and the speed cap; speeds never go negative."""
    speed = desired
    if performance is not None:
        if limit_rate:
            speed = min(speed, current + performance.max_acceleration * dt)
            speed = max(speed, current - performance.max_deceleration * dt)
        speed = min(speed, performance.max_speed)
    return max(speed, 0.0)


def displacement(v0: float, v1: float, dt: float) -> float:
    """Distance covered in one frame with a linear speed change."""
    return 0.5 * (v0 + v1) * dt


def arc_length_step(distance: float, curvature: float, t_road: float) -> float:
    """Reference-line arc length that moves a point at lateral offset t_road by `distance`."""
    return distance / max(1.0 - curvature * t_road, 0.1)


def wheel_angle(length: float, dh: float, distance: float, steerable: bool = True) -> float:
    """Kinematic bicycle steering angle for a heading change dh over distance."""
    if not steerable or distance < 1e-9:
        return 0.0
    return math.atan(WHEELBASE_FACTOR * length * dh / distance)
