"""Classical ray dynamics in the closed cavity.

Rays propagate in straight lines inside the triangle (slits ignored; the
cavity is treated as closed) and reflect specularly off the three walls.
Wall intersections are found analytically: linear equations for the two
legs and the straight hypotenuse, a quadratic for the arc. No time
discretization enters, so the only error source is roundoff.

The arc bulges into the cavity, so from the inside it is a dispersing
(convex) mirror: neighboring rays separate exponentially, which is what
lyapunov_exponent and parallel_deviation measure. The straight triangle is
piecewise isometric and has zero exponent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, CornerHitError, NumericsError
from .geometry import ApparatusGeometry, Domain

_CORNER_RTOL = 1e-12
_STEP_TOL = 1e-13


@dataclass(frozen=True)
class RayState:
    """Position inside the cavity plus direction angle (radians)."""

    x: float
    y: float
    theta: float


@dataclass
class Trajectory:
    points: np.ndarray      # (n_bounces + 1, 2), start plus each impact
    thetas: np.ndarray      # (n_bounces + 1,), direction after each impact
    walls: np.ndarray       # (n_bounces,), Domain label of each wall hit
    path_length: float

    def wall_sequence(self):
        return [Domain(int(w)) for w in self.walls]


def _arc_span(geom: ApparatusGeometry):
    cx, cy = geom.arc_center
    th_a = math.atan2(geom.leg - cy, -cx)
    th_b = math.atan2(-cy, geom.leg - cx)
    return min(th_a, th_b), max(th_a, th_b)


def _next_wall_hit(geom: ApparatusGeometry, x, y, ux, uy, arc_span):
    """(t, wall, nx, ny): nearest wall along the ray, unit inward normal."""
    L = geom.leg
    best_t = math.inf
    best = None

    if uy < 0.0:
        t = -y / uy
        if _STEP_TOL < t < best_t and -1e-9 <= x + t * ux <= L + 1e-9:
            best_t, best = t, (Domain.BASE, 0.0, 1.0)
    if ux < 0.0:
        t = -x / ux
        if _STEP_TOL < t < best_t and -1e-9 <= y + t * uy <= L + 1e-9:
            best_t, best = t, (Domain.SIDE, 1.0, 0.0)

    if geom.is_arc:
        cx, cy = geom.arc_center
        a = geom.arc_radius
        px, py = x - cx, y - cy
        b = px * ux + py * uy
        c = px * px + py * py - a * a
        disc = b * b - c
        if disc > 0.0:
            root = math.sqrt(disc)
            for t in (-b - root, -b + root):
                if _STEP_TOL < t < best_t:
                    hx, hy = x + t * ux, y + t * uy
                    th = math.atan2(hy - cy, hx - cx)
                    if arc_span[0] - 1e-9 <= th <= arc_span[1] + 1e-9:
                        nx, ny = (hx - cx) / a, (hy - cy) / a
                        best_t, best = t, (Domain.HYPOTENUSE, nx, ny)
                        break
    else:
        denom = ux + uy
        if denom > 0.0:
            t = (L - x - y) / denom
            if _STEP_TOL < t < best_t:
                hx = x + t * ux
                if -1e-9 <= hx <= L + 1e-9:
                    s = -1.0 / math.sqrt(2.0)
                    best_t, best = t, (Domain.HYPOTENUSE, s, s)

    if best is None:
        raise NumericsError(
            f"ray escaped the cavity at ({x:.15g}, {y:.15g}) "
            f"heading {math.atan2(uy, ux):.15g}")
    wall, nx, ny = best
    return best_t, wall, nx, ny


def trace_trajectory(geom: ApparatusGeometry, state: RayState,
                     n_bounces: int) -> Trajectory:
    """Follow a ray for n_bounces specular reflections."""
    if n_bounces < 1:
        raise ConfigError("n_bounces must be >= 1")
    L = geom.leg
    corner_tol = _CORNER_RTOL * L
    corners = ((0.0, 0.0), (L, 0.0), (0.0, L))
    arc_span = _arc_span(geom) if geom.is_arc else None

    x, y = float(state.x), float(state.y)
    theta = float(state.theta)
    points = np.empty((n_bounces + 1, 2))
    thetas = np.empty(n_bounces + 1)
    walls = np.empty(n_bounces, dtype=np.uint8)
    points[0] = (x, y)
    thetas[0] = theta
    path = 0.0

    for k in range(n_bounces):
        ux, uy = math.cos(theta), math.sin(theta)
        t, wall, nx, ny = _next_wall_hit(geom, x, y, ux, uy, arc_span)
        x, y = x + t * ux, y + t * uy
        path += t
        for cx, cy in corners:
            if math.hypot(x - cx, y - cy) < corner_tol:
                raise CornerHitError((x, y), k)
        dot = ux * nx + uy * ny
        ux, uy = ux - 2.0 * dot * nx, uy - 2.0 * dot * ny
        theta = math.atan2(uy, ux)
        points[k + 1] = (x, y)
        thetas[k + 1] = theta
        walls[k] = int(wall)

    return Trajectory(points=points, thetas=thetas, walls=walls,
                      path_length=path)


@dataclass
class LyapunovResult:
    exponent: float          # per unit path length
    n_renormalizations: int
    path_length: float
    log_growth: float


def _twin_advance(geom, x, y, theta, arc_span):
    """One bounce of a ray; returns the new (x, y, theta, t)."""
    ux, uy = math.cos(theta), math.sin(theta)
    t, _, nx, ny = _next_wall_hit(geom, x, y, ux, uy, arc_span)
    x, y = x + t * ux, y + t * uy
    dot = ux * nx + uy * ny
    return x, y, math.atan2(uy - 2.0 * dot * ny, ux - 2.0 * dot * nx), t


def _mirror_inside(geom, x, y):
    """Mirror roundoff-scale wall violations back into the cavity.

    Interpolating between two points of a curved wall lands on its convex
    side by O(d^2 / radius); left alone that seeds a spurious grazing
    bounce. The correction here is at roundoff scale and does not bias the
    stretching statistics.
    """
    if y < 0.0:
        y = -y
    if x < 0.0:
        x = -x
    if geom.is_arc:
        cx, cy = geom.arc_center
        d = math.hypot(x - cx, y - cy)
        if 0.0 < d < geom.arc_radius:
            f = (2.0 * geom.arc_radius - d) / d
            x = cx + (x - cx) * f
            y = cy + (y - cy) * f
    else:
        pen = (x + y - geom.leg) / math.sqrt(2.0)
        if pen > 0.0:
            shift = 2.0 * pen / math.sqrt(2.0)
            x -= shift
            y -= shift
    return x, y


def lyapunov_exponent(geom: ApparatusGeometry, state: RayState,
                      n_bounces: int, offset: float = 1e-9,
                      renorm_threshold: float = 1e-6) -> LyapunovResult:
    """Two-trajectory stretching rate per unit path length.

    A twin ray starts displaced by `offset` perpendicular to the initial
    direction. Both rays advance bounce by bounce; whenever their phase
    space separation d = sqrt(|dr|^2 + L^2 dtheta^2) grows past
    renorm_threshold the twin is pulled back to distance `offset` along the
    current separation vector and the log of the growth factor accumulates.
    Zero offset short-circuits to a zero exponent: the rays are identical.
    """
    if n_bounces < 1000:
        raise ConfigError(
            f"lyapunov estimate needs >= 1000 bounces, got {n_bounces}")
    if offset < 0.0 or offset >= renorm_threshold:
        raise ConfigError("offset must satisfy 0 <= offset < threshold")
    L = geom.leg
    arc_span = _arc_span(geom) if geom.is_arc else None
    if offset == 0.0:
        ref = trace_trajectory(geom, state, n_bounces)
        return LyapunovResult(exponent=0.0, n_renormalizations=0,
                              path_length=ref.path_length, log_growth=0.0)

    rx, ry, rth = float(state.x), float(state.y), float(state.theta)
    nx0, ny0 = -math.sin(rth), math.cos(rth)
    tx, ty, tth = rx + offset * nx0, ry + offset * ny0, rth

    log_sum = 0.0
    n_renorm = 0
    path = 0.0
    for _ in range(n_bounces):
        rx, ry, rth, dt_ref = _twin_advance(geom, rx, ry, rth, arc_span)
        tx, ty, tth, _ = _twin_advance(geom, tx, ty, tth, arc_span)
        path += dt_ref
        dth = math.remainder(tth - rth, 2.0 * math.pi)
        d = math.sqrt((tx - rx) ** 2 + (ty - ry) ** 2 + (L * dth) ** 2)
        if d > renorm_threshold:
            log_sum += math.log(d / offset)
            n_renorm += 1
            shrink = offset / d
            tx = rx + (tx - rx) * shrink
            ty = ry + (ty - ry) * shrink
            tth = rth + dth * shrink
            tx, ty = _mirror_inside(geom, tx, ty)
    dth = math.remainder(tth - rth, 2.0 * math.pi)
    d = math.sqrt((tx - rx) ** 2 + (ty - ry) ** 2 + (L * dth) ** 2)
    if d > 0.0:
        log_sum += math.log(d / offset)
    return LyapunovResult(exponent=log_sum / path,
                          n_renormalizations=n_renorm,
                          path_length=path, log_growth=log_sum)


def direction_census(geom: ApparatusGeometry, state: RayState,
                     n_bounces: int, bin_width: float = 1e-9) -> dict:
    """Count distinct direction angles visited, binned to bin_width.

    The straight triangle generates a finite dihedral set (at most 8 bins);
    the arc keeps producing new directions.
    """
    if n_bounces < 100:
        raise ConfigError(
            f"direction census needs >= 100 bounces, got {n_bounces}")
    traj = trace_trajectory(geom, state, n_bounces)
    two_pi = 2.0 * math.pi
    counts: dict[int, int] = {}
    for th in traj.thetas:
        t = th % two_pi
        if two_pi - t < 0.5 * bin_width:
            t = 0.0
        key = int(round(t / bin_width))
        counts[key] = counts.get(key, 0) + 1
    return counts


@dataclass
class DeviationSeries:
    path: np.ndarray        # reference cumulative path at each bounce
    dpos: np.ndarray        # twin-to-reference distance
    dtheta: np.ndarray      # absolute direction difference (wrapped)


def parallel_deviation(geom: ApparatusGeometry, state: RayState,
                       offset: float, n_bounces: int) -> DeviationSeries:
    """Separation history of two initially parallel rays, no clamping.

    Useful for watching the straight case stay flat (isometric walls) and
    the arc case grow until the separation saturates at the cavity size.
    Zero offset returns identically zero series.
    """
    if n_bounces < 1:
        raise ConfigError("n_bounces must be >= 1")
    arc_span = _arc_span(geom) if geom.is_arc else None
    rx, ry, rth = float(state.x), float(state.y), float(state.theta)
    nx0, ny0 = -math.sin(rth), math.cos(rth)
    tx, ty, tth = rx + offset * nx0, ry + offset * ny0, rth

    path = np.empty(n_bounces)
    dpos = np.empty(n_bounces)
    dth_out = np.empty(n_bounces)
    acc = 0.0
    for k in range(n_bounces):
        rx, ry, rth, dt_ref = _twin_advance(geom, rx, ry, rth, arc_span)
        if offset != 0.0:
            tx, ty, tth, _ = _twin_advance(geom, tx, ty, tth, arc_span)
        else:
            tx, ty, tth = rx, ry, rth
        acc += dt_ref
        path[k] = acc
        dpos[k] = math.hypot(tx - rx, ty - ry)
        dth_out[k] = abs(math.remainder(tth - rth, 2.0 * math.pi))
    return DeviationSeries(path=path, dpos=dpos, dtheta=dth_out)
