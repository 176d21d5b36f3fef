"""Detector film accumulation and fringe analysis.

The film is one grid row inside the radiation box. Its record is the time
integral of |psi|^2 along that row over a stated time window, scaled so the
record integrates to the probability absorbed below the film during the
window (the flux that registered rather than returned). Everything else in
this module is plain signal analysis on such records.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import gaussian_filter1d

from .errors import ConfigError, NumericsError
from .geometry import GridSpec, PotentialField
from .solver import WaveField, absorber_sink_rate


@dataclass
class FilmRecord:
    """Accumulated film pattern and its bookkeeping.

    p integrates to `absorbed` over xs. Halves split the time window at its
    midpoint; subwindows split it evenly. All share one normalization so
    p = p_half_first + p_half_second exactly.
    """

    xs: np.ndarray
    p: np.ndarray
    window: tuple[float, float]
    absorbed: float
    dx: float
    p_half_first: np.ndarray | None = None
    p_half_second: np.ndarray | None = None
    subwindows: list = field(default_factory=list)


class FilmRecorder:
    """evolve() recorder accumulating the film row time integral."""

    def __init__(self, potential: PotentialField, window: tuple[float, float],
                 cadence: int = 1, n_subwindows: int = 0):
        if cadence < 1:
            raise ConfigError("film cadence must be >= 1")
        t_a, t_b = float(window[0]), float(window[1])
        if not t_b > t_a:
            raise ConfigError(f"empty film window [{t_a}, {t_b}]")
        self.window = (t_a, t_b)
        self.cadence = cadence
        self.n_subwindows = int(n_subwindows)
        grid = potential.grid
        self.row = potential.film_row
        self._raw = np.zeros(grid.nx)
        self._halves = np.zeros((2, grid.nx))
        self._subs = (np.zeros((self.n_subwindows, grid.nx))
                      if self.n_subwindows > 0 else None)
        self._absorbed_raw = 0.0
        self._grid = grid

    def observe(self, fld: WaveField, potential: PotentialField, k: int):
        if k % self.cadence:
            return
        t_a, t_b = self.window
        if not (t_a <= fld.t <= t_b):
            return
        w = self._grid.dt * self.cadence
        row = np.abs(fld.psi[self.row, :]) ** 2 * w
        self._raw += row
        t_mid = 0.5 * (t_a + t_b)
        self._halves[0 if fld.t < t_mid else 1] += row
        if self._subs is not None:
            frac = (fld.t - t_a) / (t_b - t_a)
            idx = min(self.n_subwindows - 1, int(frac * self.n_subwindows))
            self._subs[idx] += row
        self._absorbed_raw += w * absorber_sink_rate(
            fld, potential, self._grid, below_row=self.row)

    def finalize(self) -> FilmRecord:
        total = float(np.sum(self._raw)) * self._grid.dx
        if total <= 0.0:
            raise NumericsError("film record is empty over the window")
        scale = self._absorbed_raw / total
        subs = ([scale * s for s in self._subs] if self._subs is not None
                else [])
        return FilmRecord(
            xs=self._grid.x_centers(),
            p=scale * self._raw,
            window=self.window,
            absorbed=self._absorbed_raw,
            dx=self._grid.dx,
            p_half_first=scale * self._halves[0],
            p_half_second=scale * self._halves[1],
            subwindows=subs,
        )


def accumulate_film(fields, film_row: int, window: tuple[float, float],
                    grid: GridSpec, absorbed: float | None = None) -> FilmRecord:
    """Film record from an iterable of WaveField snapshots.

    Each sample is weighted by the time gap to its successor (the last one
    reuses the previous gap). With `absorbed` given the record is scaled to
    integrate to it; otherwise the raw time integral is returned.
    """
    t_a, t_b = float(window[0]), float(window[1])
    if not t_b > t_a:
        raise ConfigError(f"empty film window [{t_a}, {t_b}]")
    rows = []
    times = []
    for fld in fields:
        if t_a <= fld.t <= t_b:
            rows.append(np.abs(fld.psi[film_row, :]) ** 2)
            times.append(fld.t)
    if not rows:
        raise NumericsError("no field samples inside the film window")
    if len(times) > 1:
        gaps = np.diff(times)
        weights = np.append(gaps, gaps[-1])
    else:
        weights = np.array([grid.dt])
    p = np.einsum("s,sx->x", weights, np.asarray(rows))
    total = float(np.sum(p)) * grid.dx
    absorbed_out = total if absorbed is None else float(absorbed)
    if absorbed is not None:
        if total <= 0.0:
            raise NumericsError("film record is empty over the window")
        p = p * (absorbed_out / total)
    return FilmRecord(xs=grid.x_centers(), p=p, window=(t_a, t_b),
                      absorbed=absorbed_out, dx=grid.dx)


@dataclass
class Decomposition:
    """Two-slit record split into single-slit parts plus the cross term."""

    p_int: np.ndarray
    cs_bound: np.ndarray
    cs_excess: float


def decompose_interference(p_both, p1, p2) -> Decomposition:
    """p_int = p_both - p1 - p2, with its pointwise coherence bound.

    For records produced by a common linear field the cross term obeys
    |p_int| <= 2 sqrt(p1 p2); cs_excess reports the worst violation found
    (roundoff-level for analytic inputs, small for measured triplets).
    """
    p_both = np.asarray(p_both, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    if not (p_both.shape == p1.shape == p2.shape):
        raise ConfigError("record shapes differ; patterns are not comparable")
    if np.any(p1 < -1e-30) or np.any(p2 < -1e-30):
        raise ConfigError("single-slit records must be nonnegative")
    p_int = p_both - p1 - p2
    bound = 2.0 * np.sqrt(np.clip(p1, 0.0, None) * np.clip(p2, 0.0, None))
    excess = float(np.max(np.abs(p_int) - bound))
    return Decomposition(p_int=p_int, cs_bound=bound, cs_excess=max(0.0, excess))


@dataclass
class VisibilityResult:
    value: float
    n_maxima: int
    n_minima: int
    p_smooth: np.ndarray
    xs: np.ndarray


def _local_extrema(p):
    """Indices of strict interior local maxima and minima."""
    interior = np.arange(1, len(p) - 1)
    left = p[interior] - p[interior - 1]
    right = p[interior] - p[interior + 1]
    maxima = interior[(left > 0) & (right > 0)]
    minima = interior[(left < 0) & (right < 0)]
    return maxima, minima


def visibility(record: FilmRecord, window_on_film: tuple[float, float],
               smooth_width: float = 0.0) -> VisibilityResult:
    """Fringe contrast (pmax - pmin) / (pmax + pmin) on a spatial window.

    pmax is the largest local maximum and pmin the smallest local minimum of
    the (optionally Gaussian-smoothed) pattern. Fewer than three local
    extrema in the window means there is nothing to call a fringe.
    """
    lo, hi = float(window_on_film[0]), float(window_on_film[1])
    sel = (record.xs >= lo) & (record.xs <= hi)
    if int(np.sum(sel)) < 8:
        raise ConfigError("film window covers fewer than 8 samples")
    xs = record.xs[sel]
    p = np.asarray(record.p, dtype=float)[sel]
    if smooth_width > 0.0:
        p = gaussian_filter1d(p, sigma=smooth_width / record.dx,
                              mode="nearest")
    maxima, minima = _local_extrema(p)
    if len(maxima) + len(minima) < 3:
        raise NumericsError(
            f"no fringe structure: {len(maxima) + len(minima)} local extrema "
            "in the window, need >= 3")
    pmax = float(np.max(p[maxima]))
    pmin = float(np.min(p[minima]))
    if pmax + pmin <= 0.0:
        raise NumericsError("degenerate pattern: pmax + pmin <= 0")
    return VisibilityResult(value=(pmax - pmin) / (pmax + pmin),
                            n_maxima=len(maxima), n_minima=len(minima),
                            p_smooth=p, xs=xs)


def pattern_correlation(pa, pb) -> float:
    """Pearson correlation of two patterns on a common abscissa."""
    pa = np.asarray(pa, dtype=float)
    pb = np.asarray(pb, dtype=float)
    if pa.shape != pb.shape:
        raise ConfigError("record shapes differ; patterns are not comparable")
    sa = pa - pa.mean()
    sb = pb - pb.mean()
    den = math.sqrt(float(np.sum(sa * sa)) * float(np.sum(sb * sb)))
    if den == 0.0:
        raise NumericsError("constant pattern has no correlation")
    return float(np.sum(sa * sb)) / den


def visibility_series(record: FilmRecord, window_on_film, smooth_width=0.0):
    """Visibility per time subwindow; NaN where a subwindow has no fringes."""
    out = []
    for sub in record.subwindows:
        partial = FilmRecord(xs=record.xs, p=sub, window=record.window,
                             absorbed=float(np.sum(sub)) * record.dx,
                             dx=record.dx)
        try:
            out.append(visibility(partial, window_on_film, smooth_width).value)
        except NumericsError:
            out.append(float("nan"))
    return out
