"""Apparatus geometry and rasterization.

The apparatus is a right isoceles triangular cavity with legs of length
``leg`` along x = 0 and y = 0 and a hypotenuse joining (0, leg) to (leg, 0).
The hypotenuse is either the straight chord or a circular arc through the
same endpoints bulging into the cavity (a dispersing wall). The base wall
along y = 0 carries two slit openings; below it hangs an open radiation box
of depth ``box_depth`` whose floor and side rails absorb outgoing flux. A
horizontal detector film row sits ``film_offset`` above the box floor.

Walls are finite-height potential barriers with a C1 smoothstep skin of
width ``wall_skin`` facing the cavity, backed by a hard (Dirichlet) core.
The absorbers are quartic negative imaginary potentials of width
``absorber_width``.

Coordinates are in cavity units (leg lengths); the raster grid is cell
centered: cell (ix, iy) sits at (x0 + (ix+0.5)dx, y0 + (iy+0.5)dy).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, GeometryError


class Domain(enum.IntEnum):
    """Region labels for points of the apparatus."""

    INTERIOR = 0      # open cavity
    BASE = 1          # slit wall band along y = 0
    SIDE = 2          # vertical wall band along x = 0
    HYPOTENUSE = 4    # straight or arc hypotenuse wall band
    EXTERIOR = 8      # radiation box, absorbers, and everything beyond


_STRAIGHT = "straight"
_ARC = "arc"


@dataclass(frozen=True)
class ApparatusGeometry:
    """Resolved, validated apparatus description.

    ``arc_radius`` and ``arc_center`` are derived from ``sagitta`` for the
    arc variant and are None for the straight one.
    """

    hypotenuse: str
    leg: float
    sagitta: float
    slit_separation: float
    slit_width: float
    box_depth: float
    film_offset: float
    wall_height: float
    wall_skin: float
    absorber_width: float
    absorber_strength: float
    margin: float
    arc_radius: float | None = None
    arc_center: tuple[float, float] | None = None

    @property
    def is_arc(self) -> bool:
        return self.hypotenuse == _ARC

    def slit_intervals(self) -> list[tuple[float, float]]:
        """The two open x-intervals cut through the base wall."""
        half = 0.5 * self.slit_width
        out = []
        for c in self.slit_centers():
            out.append((c - half, c + half))
        return out

    def slit_centers(self) -> list[float]:
        mid = 0.5 * self.leg
        return [mid - 0.5 * self.slit_separation,
                mid + 0.5 * self.slit_separation]

    def hyp_depth(self, x, y):
        """Signed penetration depth into the hypotenuse wall.

        Negative inside the cavity, zero on the nominal wall line, positive
        beyond it. Vectorized over numpy inputs.
        """
        if self.is_arc:
            cx, cy = self.arc_center
            return self.arc_radius - np.hypot(x - cx, y - cy)
        return (x + y - self.leg) / math.sqrt(2.0)

    def film_y(self) -> float:
        return -self.box_depth + self.film_offset


_GEOMETRY_DEFAULTS = {
    "hypotenuse": _STRAIGHT,
    "leg_length": 1.0,
    "sagitta": 0.06,
    "slit_separation": 0.3,
    "slit_width": 0.05,
    "box_depth": 1.5,
    "film_offset": 0.6,
    "wall_height": 4.0e4,
    "wall_skin": 0.025,
    "absorber_width": 0.2,
    "absorber_strength": 1.2e4,
    "margin": 0.05,
}


def build_apparatus(config) -> ApparatusGeometry:
    """Validate a geometry mapping and solve derived quantities.

    ``config`` is a mapping with the keys of ``_GEOMETRY_DEFAULTS``; missing
    keys take defaults, unknown keys are rejected.
    """
    cfg = dict(_GEOMETRY_DEFAULTS)
    for key, value in dict(config).items():
        if key not in cfg:
            raise ConfigError(f"unknown geometry key: {key!r}")
        cfg[key] = value

    kind = str(cfg["hypotenuse"]).lower()
    if kind not in (_STRAIGHT, _ARC):
        raise GeometryError(
            f"hypotenuse must be 'straight' or 'arc', got {cfg['hypotenuse']!r}")

    leg = float(cfg["leg_length"])
    if not (leg > 0.0) or not math.isfinite(leg):
        raise GeometryError(f"leg_length must be positive, got {leg}")

    for key in ("slit_separation", "slit_width", "box_depth", "film_offset",
                "wall_height", "wall_skin", "absorber_width",
                "absorber_strength", "margin"):
        v = float(cfg[key])
        if not math.isfinite(v) or v <= 0.0:
            raise GeometryError(f"{key} must be positive and finite, got {v}")

    sep = float(cfg["slit_separation"])
    width = float(cfg["slit_width"])
    if sep <= width:
        raise GeometryError(
            f"slits overlap: separation {sep} must exceed width {width}")
    if 0.5 * leg + 0.5 * sep + 0.5 * width >= leg:
        raise GeometryError(
            "slits extend past the base wall; shrink separation or width")

    skin = float(cfg["wall_skin"])
    if 2.0 * skin >= float(cfg["box_depth"]):
        raise GeometryError("box_depth must exceed twice the wall skin")
    if float(cfg["film_offset"]) >= float(cfg["box_depth"]) - 2.0 * skin:
        raise GeometryError("film_offset places the film inside the slit wall")

    sagitta = float(cfg["sagitta"])
    arc_radius = None
    arc_center = None
    if kind == _ARC:
        if sagitta <= 1e-12 * leg:
            raise GeometryError(
                f"degenerate arc: sagitta {sagitta} is not resolvable; "
                "use hypotenuse = straight instead")
        height = leg / math.sqrt(2.0)
        if sagitta >= height:
            raise GeometryError(
                f"arc sagitta {sagitta} must be below the triangle height "
                f"{height:.6g}")
        # circle through (0, leg) and (leg, 0) whose midpoint sags `sagitta`
        # toward the origin: radius from the chord half-length.
        half_chord_sq = 0.5 * leg * leg
        arc_radius = (half_chord_sq + sagitta * sagitta) / (2.0 * sagitta)
        cc = 0.5 * leg + (arc_radius - sagitta) / math.sqrt(2.0)
        arc_center = (cc, cc)
        sagitta_out = sagitta
    else:
        sagitta_out = 0.0

    return ApparatusGeometry(
        hypotenuse=kind,
        leg=leg,
        sagitta=sagitta_out,
        slit_separation=sep,
        slit_width=width,
        box_depth=float(cfg["box_depth"]),
        film_offset=float(cfg["film_offset"]),
        wall_height=float(cfg["wall_height"]),
        wall_skin=skin,
        absorber_width=float(cfg["absorber_width"]),
        absorber_strength=float(cfg["absorber_strength"]),
        margin=float(cfg["margin"]),
        arc_radius=arc_radius,
        arc_center=arc_center,
    )


@dataclass(frozen=True)
class GridSpec:
    """Uniform cell-centered raster grid with time step and units.

    ``x0``/``y0`` mark the lower-left corner of the domain; cell centers are
    at x0 + (ix + 0.5) dx. Arrays over this grid are indexed [iy, ix].
    """

    nx: int
    ny: int
    dx: float
    dy: float
    dt: float
    x0: float = 0.0
    y0: float = 0.0
    hbar: float = 1.0
    mass: float = 1.0

    def __post_init__(self):
        if self.nx < 8 or self.ny < 8:
            raise ConfigError(f"grid too small: {self.nx} x {self.ny}")
        for name in ("dx", "dy", "dt", "hbar", "mass"):
            v = getattr(self, name)
            if not (v > 0.0) or not math.isfinite(v):
                raise ConfigError(f"{name} must be positive, got {v}")

    def x_centers(self) -> np.ndarray:
        return self.x0 + (np.arange(self.nx) + 0.5) * self.dx

    def y_centers(self) -> np.ndarray:
        return self.y0 + (np.arange(self.ny) + 0.5) * self.dy

    def mesh(self):
        """(X, Y) cell-center coordinate arrays, each shaped (ny, nx)."""
        return np.meshgrid(self.x_centers(), self.y_centers())


def default_dt(grid_like_dx, grid_like_dy, mass=1.0, hbar=1.0,
               factor=0.2) -> float:
    """Conservative time step: factor * M * min(dx, dy)^2 / hbar."""
    d = min(grid_like_dx, grid_like_dy)
    return factor * mass * d * d / hbar


def grid_for_apparatus(geom: ApparatusGeometry, nx: int, ny: int,
                       dt: float | None = None, hbar: float = 1.0,
                       mass: float = 1.0) -> GridSpec:
    """Grid covering the apparatus: cavity plus margin plus radiation box."""
    x0 = -geom.margin
    x1 = geom.leg + geom.margin
    y0 = -geom.box_depth
    y1 = geom.leg + geom.margin
    dx = (x1 - x0) / nx
    dy = (y1 - y0) / ny
    if dt is None:
        dt = default_dt(dx, dy, mass=mass, hbar=hbar)
    return GridSpec(nx=nx, ny=ny, dx=dx, dy=dy, dt=dt, x0=x0, y0=y0,
                    hbar=hbar, mass=mass)


@dataclass
class PotentialField:
    """Rasterized apparatus on a grid.

    U         real barrier potential, shape (ny, nx)
    W         absorber strength (applied as -iW), shape (ny, nx)
    dirichlet True where the field is pinned to zero (hard wall core)
    domain    Domain labels per cell
    film_row  y-index of the detector film row
    """

    grid: GridSpec
    geom: ApparatusGeometry
    U: np.ndarray
    W: np.ndarray
    dirichlet: np.ndarray
    domain: np.ndarray
    film_row: int
    sealed_slits: tuple[int, ...] = field(default_factory=tuple)


def _smoothstep(xi):
    """C1 ramp: 0 below 0, 1 above 1, 3xi^2 - 2xi^3 between."""
    xi = np.clip(xi, 0.0, 1.0)
    return xi * xi * (3.0 - 2.0 * xi)


def _slit_gate(geom: ApparatusGeometry, x: np.ndarray,
               sealed: tuple[int, ...]) -> np.ndarray:
    """Openness of the base wall at abscissa x: 0 solid, 1 fully open.

    Each slit opens with smoothstep side skins of width ``wall_skin`` just
    inside its edges. ``sealed`` lists slit indices (0 and/or 1) to close.
    """
    gate = np.zeros_like(x)
    skin = geom.wall_skin
    for idx, (lo, hi) in enumerate(geom.slit_intervals()):
        if idx in sealed:
            continue
        g = _smoothstep((x - lo) / skin) * _smoothstep((hi - x) / skin)
        np.maximum(gate, g, out=gate)
    return gate


def domain_grid(geom: ApparatusGeometry, x, y) -> np.ndarray:
    """Vectorized Domain labels; ties on wall faces go to the wall.

    Precedence when bands overlap (corners): BASE, then SIDE, then
    HYPOTENUSE.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    band = 2.0 * geom.wall_skin
    L = geom.leg

    out = np.full(np.broadcast(x, y).shape, int(Domain.EXTERIOR),
                  dtype=np.uint8)

    hyp = geom.hyp_depth(x, y)
    interior = (x > 0.0) & (y > 0.0) & (hyp < 0.0)
    out[interior] = int(Domain.INTERIOR)

    in_hyp = (y > 0.0) & (x > 0.0) & (hyp >= 0.0) & (hyp <= band)
    out[in_hyp] = int(Domain.HYPOTENUSE)

    in_side = (x <= 0.0) & (x >= -band) & (y >= 0.0) & (y <= L + band)
    out[in_side] = int(Domain.SIDE)

    in_base = (y <= 0.0) & (y >= -band) & (x >= -band) & (x <= L + band)
    out[in_base] = int(Domain.BASE)

    return out


def domain_of(geom: ApparatusGeometry, point) -> Domain:
    """Domain label of a single point."""
    x, y = float(point[0]), float(point[1])
    return Domain(int(domain_grid(geom, np.array(x), np.array(y))))


def rasterize_potential(geom: ApparatusGeometry, grid: GridSpec,
                        sealed_slits: tuple[int, ...] = ()) -> PotentialField:
    """Sample the apparatus onto a grid.

    Preconditions: the wall skin and the slit width must each span at least
    4 cells, otherwise the smoothstep profiles are unresolved and the run
    would silently misbehave.
    """
    dmax = max(grid.dx, grid.dy)
    if geom.wall_skin < 4.0 * dmax:
        raise GeometryError(
            f"under-resolved wall skin: {geom.wall_skin:.4g} spans "
            f"{geom.wall_skin / dmax:.2f} cells, need >= 4")
    if geom.slit_width < 4.0 * grid.dx:
        raise GeometryError(
            f"under-resolved slit: width {geom.slit_width:.4g} spans "
            f"{geom.slit_width / grid.dx:.2f} cells, need >= 4")
    for s in sealed_slits:
        if s not in (0, 1):
            raise ConfigError(f"sealed slit index must be 0 or 1, got {s}")

    X, Y = grid.mesh()
    L = geom.leg
    skin = geom.wall_skin
    band = 2.0 * skin
    U0 = geom.wall_height

    U = np.zeros((grid.ny, grid.nx))
    dirichlet = np.zeros((grid.ny, grid.nx), dtype=bool)

    # upper region: vertical wall and hypotenuse wall around the cavity
    upper = Y >= 0.0
    pen_v = -X
    pen_h = geom.hyp_depth(X, Y)
    ramp = np.maximum(_smoothstep(pen_v / skin), _smoothstep(pen_h / skin))
    U[upper] = U0 * ramp[upper]
    dirichlet |= upper & ((pen_v >= band) | (pen_h >= band))

    # base wall band with slit gates
    gate = _slit_gate(geom, X[0], sealed=tuple(sealed_slits))
    in_band = (Y < 0.0) & (Y >= -band)
    solid = (1.0 - gate)[None, :] * _smoothstep(-Y / skin)
    U[in_band] = (U0 * solid)[in_band]
    # hard core behind the skin, except where a slit channel passes through
    core = in_band & (Y < -skin) & (solid >= 0.999)
    dirichlet |= core
    # wall band cells outside the box footprint are dead space
    dirichlet |= in_band & ((X <= 0.0) | (X >= L))

    # radiation box: open region below the wall band
    below = Y < -band
    in_box = below & (X > 0.0) & (X < L)
    dirichlet |= below & ~in_box

    # absorbers: quartic sinks on the box floor and side rails
    W = np.zeros((grid.ny, grid.nx))
    wa = geom.absorber_width
    eta = geom.absorber_strength
    floor_xi = np.clip(((-geom.box_depth + wa) - Y) / wa, 0.0, 1.0)
    left_xi = np.clip((wa - X) / wa, 0.0, 1.0)
    right_xi = np.clip((X - (L - wa)) / wa, 0.0, 1.0)
    cap = floor_xi ** 4 + left_xi ** 4 + right_xi ** 4
    W[in_box] = eta * cap[in_box]

    U[dirichlet] = 0.0
    W[dirichlet] = 0.0

    domain = domain_grid(geom, X, Y)

    film_y = geom.film_y()
    film_row = int(np.argmin(np.abs(grid.y_centers() - film_y)))

    return PotentialField(grid=grid, geom=geom, U=U, W=W, dirichlet=dirichlet,
                          domain=domain, film_row=film_row,
                          sealed_slits=tuple(sealed_slits))
