"""
Reference-line geometry

Evaluates the planView of a road at arc length s: closed forms for lines and
arcs, adaptive quadrature for clothoids (with an RK4 fallback), and
arc-length inversion for cubic polynomials. Lane borders are derived from the
width polynomials of a lane section plus the road's lane offset.
"""

import math
from typing import Dict, NamedTuple, Tuple

import numpy as np
from scipy import integrate, optimize

from src.errors import OutOfRange
from src.opendrive.model import GeometrySegment, OpenDriveRoad

S_TOLERANCE = 1e-9
QUAD_TOLERANCE = 1e-8
RK4_STEP = 1e-3


class Pose(NamedTuple):
    x: float
    y: float
    h: float


def normalize_angle(angle: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    wrapped = math.fmod(angle, 2.0 * math.pi)
    if wrapped <= -math.pi:
        wrapped += 2.0 * math.pi
    elif wrapped > math.pi:
        wrapped -= 2.0 * math.pi
    return wrapped


def _line(seg: GeometrySegment, ds: float) -> Pose:
    return Pose(seg.x + ds * math.cos(seg.heading), seg.y + ds * math.sin(seg.heading), seg.heading)


def _arc(seg: GeometrySegment, ds: float, curvature: float) -> Pose:
    h1 = seg.heading + curvature * ds
    x = seg.x + (math.sin(h1) - math.sin(seg.heading)) / curvature
    y = seg.y + (math.cos(seg.heading) - math.cos(h1)) / curvature
    return Pose(x, y, h1)


def clothoid_rk4(h0: float, k0: float, rate: float, length: float, step: float = RK4_STEP) -> Tuple[float, float]:
    """
    Integrate (cos theta, sin theta) with theta' = k0 + rate*u by classic RK4.

    The derivative does not depend on the position, so each RK4 step reduces
    to Simpson's rule on the step interval.
    """
    n = max(int(math.ceil(length / step)), 1)
    h = length / n
    u = np.linspace(0.0, length, n + 1)
    mid = u[:-1] + 0.5 * h

    def theta(v):
        return h0 + k0 * v + 0.5 * rate * v * v

    tl, tm, tr = theta(u[:-1]), theta(mid), theta(u[1:])
    dx = h / 6.0 * (np.cos(tl) + 4.0 * np.cos(tm) + np.cos(tr))
    dy = h / 6.0 * (np.sin(tl) + 4.0 * np.sin(tm) + np.sin(tr))
    return float(np.sum(dx)), float(np.sum(dy))


def _spiral(seg: GeometrySegment, ds: float) -> Pose:
    rate = (seg.curv_end - seg.curv_start) / seg.length
    if rate == 0.0:
        if seg.curv_start == 0.0:
            return _line(seg, ds)
        return _arc(seg, ds, seg.curv_start)

    h0, k0 = seg.heading, seg.curv_start
    heading = h0 + k0 * ds + 0.5 * rate * ds * ds
    if ds == 0.0:
        return Pose(seg.x, seg.y, heading)

    def theta(u: float) -> float:
        return h0 + k0 * u + 0.5 * rate * u * u

    dx, err_x = integrate.quad(lambda u: math.cos(theta(u)), 0.0, ds,
                               epsabs=1e-12, epsrel=1e-12, limit=200)
    dy, err_y = integrate.quad(lambda u: math.sin(theta(u)), 0.0, ds,
                               epsabs=1e-12, epsrel=1e-12, limit=200)
    if err_x > QUAD_TOLERANCE or err_y > QUAD_TOLERANCE:
        dx, dy = clothoid_rk4(h0, k0, rate, ds)
    return Pose(seg.x + dx, seg.y + dy, heading)


def _poly3_arc_length(b: float, c: float, d: float, u: float) -> float:
    if u == 0.0:
        return 0.0
    value, _ = integrate.quad(lambda t: math.sqrt(1.0 + (b + 2.0 * c * t + 3.0 * d * t * t) ** 2), 0.0, u)
    return value


def _poly3_u(seg: GeometrySegment, ds: float) -> float:
    """Local u coordinate whose curve arc length equals ds."""
    _, b, c, d = seg.poly
    if ds <= 0.0:
        return 0.0
    if c == 0.0 and d == 0.0:
        return ds / math.sqrt(1.0 + b * b)
    # arc length >= u, so the root lies in [0, ds]
    return optimize.brentq(lambda u: _poly3_arc_length(b, c, d, u) - ds, 0.0, ds, xtol=1e-12)


def _to_global(seg: GeometrySegment, u: float, v: float, local_heading: float) -> Pose:
    ch, sh = math.cos(seg.heading), math.sin(seg.heading)
    return Pose(seg.x + u * ch - v * sh, seg.y + u * sh + v * ch, seg.heading + local_heading)


def _poly3(seg: GeometrySegment, ds: float) -> Pose:
    a, b, c, d = seg.poly
    u = _poly3_u(seg, ds)
    v = a + u * (b + u * (c + u * d))
    slope = b + u * (2.0 * c + u * 3.0 * d)
    return _to_global(seg, u, v, math.atan(slope))


def _param_poly3_p(seg: GeometrySegment, ds: float) -> float:
    return ds if seg.p_range == "arcLength" else ds / seg.length


def _param_poly3(seg: GeometrySegment, ds: float) -> Pose:
    au, bu, cu, du, av, bv, cv, dv = seg.poly
    p = _param_poly3_p(seg, ds)
    u = au + p * (bu + p * (cu + p * du))
    v = av + p * (bv + p * (cv + p * dv))
    du_dp = bu + p * (2.0 * cu + p * 3.0 * du)
    dv_dp = bv + p * (2.0 * cv + p * 3.0 * dv)
    local_heading = math.atan2(dv_dp, du_dp) if (du_dp or dv_dp) else 0.0
    return _to_global(seg, u, v, local_heading)


def eval_segment(seg: GeometrySegment, ds: float) -> Pose:
    """Pose at local arc length ds along one planView primitive."""
    if seg.kind == "line":
        return _line(seg, ds)
    if seg.kind == "arc":
        return _arc(seg, ds, seg.curvature)
    if seg.kind == "spiral":
        return _spiral(seg, ds)
    if seg.kind == "poly3":
        return _poly3(seg, ds)
    if seg.kind == "paramPoly3":
        return _param_poly3(seg, ds)
    raise ValueError(f"unknown geometry kind '{seg.kind}'")


def segment_curvature(seg: GeometrySegment, ds: float) -> float:
    if seg.kind == "arc":
        return seg.curvature
    if seg.kind == "spiral":
        return seg.curv_start + (seg.curv_end - seg.curv_start) / seg.length * ds
    if seg.kind == "poly3":
        _, b, c, d = seg.poly
        u = _poly3_u(seg, ds)
        slope = b + u * (2.0 * c + u * 3.0 * d)
        second = 2.0 * c + 6.0 * d * u
        return second / (1.0 + slope * slope) ** 1.5
    if seg.kind == "paramPoly3":
        _, bu, cu, du, _, bv, cv, dv = seg.poly
        p = _param_poly3_p(seg, ds)
        u1 = bu + p * (2.0 * cu + p * 3.0 * du)
        v1 = bv + p * (2.0 * cv + p * 3.0 * dv)
        u2 = 2.0 * cu + 6.0 * du * p
        v2 = 2.0 * cv + 6.0 * dv * p
        speed_sq = u1 * u1 + v1 * v1
        if speed_sq == 0.0:
            return 0.0
        return (u1 * v2 - v1 * u2) / speed_sq ** 1.5
    return 0.0


def _segment_at(road: OpenDriveRoad, s: float) -> GeometrySegment:
    if s < -S_TOLERANCE or s > road.length + S_TOLERANCE:
        raise OutOfRange(f"s={s} outside road {road.road_id} [0, {road.length}]", line=road.line)
    current = road.geometry[0]
    for seg in road.geometry:
        if seg.s_offset <= s + S_TOLERANCE:
            current = seg
        else:
            break
    return current


def eval_reference_line(road: OpenDriveRoad, s: float) -> Pose:
    """
    Evaluate the reference line of a road.

    Args:
        road: parsed road
        s: arc length along the reference line, 0 <= s <= road.length

    Returns:
        Pose (x, y, heading) in the map frame

    Raises:
        OutOfRange: when s lies outside the road
    """
    seg = _segment_at(road, s)
    return eval_segment(seg, max(s - seg.s_offset, 0.0))


def reference_curvature(road: OpenDriveRoad, s: float) -> float:
    seg = _segment_at(road, s)
    return segment_curvature(seg, max(s - seg.s_offset, 0.0))


def lane_borders(road: OpenDriveRoad, section_index: int, s: float) -> Dict[int, Tuple[float, float]]:
    """
    Lateral (inner, outer) border offsets of every lane of a section at s.

    Offsets are measured along the left normal of the reference line.
    Lane 0 maps to (offset, offset).
    """
    section = road.lane_sections[section_index]
    ds = s - section.s_start
    base = road.lane_offset(s)
    borders: Dict[int, Tuple[float, float]] = {0: (base, base)}

    inner = base
    for lane in sorted((ln for ln in section.lanes if ln.lane_id > 0), key=lambda ln: ln.lane_id):
        outer = inner + lane.width(ds)
        borders[lane.lane_id] = (inner, outer)
        inner = outer

    inner = base
    for lane in sorted((ln for ln in section.lanes if ln.lane_id < 0), key=lambda ln: -ln.lane_id):
        outer = inner - lane.width(ds)
        borders[lane.lane_id] = (inner, outer)
        inner = outer
    return borders


def offset_point(pose: Pose, t: float) -> Tuple[float, float]:
    """Point at lateral offset t along the left normal of pose."""
    return pose.x - t * math.sin(pose.h), pose.y + t * math.cos(pose.h)
