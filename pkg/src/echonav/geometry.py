"""Planar geometry kernels shared by the acoustic, laser and collision models.

Every routine is vectorised over a set of segments stored as start points
``a`` (N, 2) and direction vectors ``d = b - a`` (N, 2).
"""

from __future__ import annotations

import math

import numpy as np


def wrap_angle(theta: float) -> float:
    """Normalise an angle to the half-open interval (-pi, pi]."""
    wrapped = math.fmod(theta + math.pi, 2.0 * math.pi)
    if wrapped <= 0.0:
        wrapped += 2.0 * math.pi
    return wrapped - math.pi


def _cross(ax, ay, bx, by):
    return ax * by - ay * bx


def _half_plane_interval(c0, c1, lo, hi):
    # Clip the parameter interval [lo, hi] to {t : c0 + c1 * t >= 0}.
    with np.errstate(divide="ignore", invalid="ignore"):
        root = -c0 / c1
    rising = c1 > 0
    falling = c1 < 0
    flat = ~(rising | falling)
    lo = np.where(rising, np.maximum(lo, root), lo)
    hi = np.where(falling, np.minimum(hi, root), hi)
    # A flat constraint is either always met or never met.
    dead = flat & (c0 < 0)
    lo = np.where(dead, np.inf, lo)
    return lo, hi


def closest_in_cone(
    a: np.ndarray,
    d: np.ndarray,
    origin: tuple[float, float],
    heading: float,
    half_angle: float,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Closest point of each segment that lies inside a planar sensor cone.

    The cone is the wedge of half-angle ``half_angle`` (radians, < pi/2)
    around ``heading`` with apex at ``origin``.

    Returns ``(visible, distance, bearing)``: a boolean mask of segments
    that intersect the wedge, the range from the apex to the nearest in-wedge
    point, and that point's bearing relative to the heading (radians).
    Entries for invisible segments are ``inf`` / ``nan``.
    """
    ox, oy = origin
    rx = a[:, 0] - ox
    ry = a[:, 1] - oy
    dx = d[:, 0]
    dy = d[:, 1]

    right = (math.cos(heading - half_angle), math.sin(heading - half_angle))
    left = (math.cos(heading + half_angle), math.sin(heading + half_angle))

    lo = np.zeros(len(a))
    hi = np.ones(len(a))
    # Counter-clockwise of the right boundary ray.
    lo, hi = _half_plane_interval(
        _cross(right[0], right[1], rx, ry), _cross(right[0], right[1], dx, dy), lo, hi
    )
    # Clockwise of the left boundary ray.
    lo, hi = _half_plane_interval(
        _cross(rx, ry, left[0], left[1]), _cross(dx, dy, left[0], left[1]), lo, hi
    )
    visible = lo <= hi

    length_sq = dx * dx + dy * dy
    t = np.clip(-(rx * dx + ry * dy) / length_sq, np.where(visible, lo, 0.0), np.where(visible, hi, 1.0))
    px = rx + t * dx
    py = ry + t * dy
    distance = np.hypot(px, py)
    visible &= distance > 0.0
    bearing = np.arctan2(py, px) - heading
    bearing = (bearing + np.pi) % (2.0 * np.pi) - np.pi
    distance = np.where(visible, distance, np.inf)
    bearing = np.where(visible, bearing, np.nan)
    return visible, distance, bearing


def ray_hits(
    a: np.ndarray,
    d: np.ndarray,
    origin: tuple[float, float],
    angles: np.ndarray,
) -> np.ndarray:
    """Range along each ray to each segment, shape (rays, segments); ``inf`` on a miss."""
    ox, oy = origin
    ux = np.cos(angles)[:, None]
    uy = np.sin(angles)[:, None]
    rx = (a[:, 0] - ox)[None, :]
    ry = (a[:, 1] - oy)[None, :]
    dx = d[:, 0][None, :]
    dy = d[:, 1][None, :]
    denom = _cross(ux, uy, dx, dy)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = _cross(rx, ry, dx, dy) / denom
        t = _cross(rx, ry, ux, uy) / denom
    hit = (denom != 0.0) & (s >= 0.0) & (t >= 0.0) & (t <= 1.0)
    return np.where(hit, s, np.inf)


def point_segment_distance(a: np.ndarray, d: np.ndarray, point: tuple[float, float]) -> np.ndarray:
    """Euclidean distance from ``point`` to each segment."""
    rx = point[0] - a[:, 0]
    ry = point[1] - a[:, 1]
    length_sq = d[:, 0] ** 2 + d[:, 1] ** 2
    t = np.clip((rx * d[:, 0] + ry * d[:, 1]) / length_sq, 0.0, 1.0)
    return np.hypot(rx - t * d[:, 0], ry - t * d[:, 1])
