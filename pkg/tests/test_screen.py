"""Film records, fringe visibility, and interference decomposition."""

import math

import numpy as np
import pytest

from qbil.errors import ConfigError, NumericsError
from qbil.geometry import GridSpec
from qbil.screen import (FilmRecord, FilmRecorder, accumulate_film,
                         decompose_interference, pattern_correlation,
                         visibility, visibility_series)
from qbil.solver import WaveField


def _record(xs, p, subwindows=()):
    dx = float(xs[1] - xs[0])
    return FilmRecord(xs=xs, p=np.asarray(p, dtype=float), window=(0.0, 1.0),
                      absorbed=float(np.sum(p)) * dx, dx=dx,
                      subwindows=list(subwindows))


def _cosine(xs, contrast, wavelength):
    # the 0.3 rad phase keeps peaks off the midpoints between samples,
    # where strict-inequality extremum detection would see a tie
    return 1.0 + contrast * np.cos(2 * math.pi * xs / wavelength + 0.3)


XS = (np.arange(8000) + 0.5) / 8000


# ---------------------------------------------------------------------------
# visibility


def test_full_contrast_cosine():
    rec = _record(XS, _cosine(XS, 1.0, 0.05))
    v = visibility(rec, (0.2, 0.8))
    assert abs(v.value - 1.0) < 1e-4


def test_half_contrast_cosine():
    rec = _record(XS, _cosine(XS, 0.5, 0.05))
    v = visibility(rec, (0.2, 0.8))
    assert v.value == pytest.approx(0.5, abs=1e-3)


def test_constant_pattern_has_no_fringes():
    rec = _record(XS, np.ones_like(XS))
    with pytest.raises(NumericsError, match="no fringe structure"):
        visibility(rec, (0.2, 0.8))


def test_visibility_is_scale_invariant():
    p = _cosine(XS, 0.37, 0.08)
    a = visibility(_record(XS, p), (0.2, 0.8)).value
    b = visibility(_record(XS, 7.3 * p), (0.2, 0.8)).value
    assert a == pytest.approx(b, rel=1e-12)


def test_visibility_counts_extrema():
    rec = _record(XS, _cosine(XS, 0.5, 0.1))
    v = visibility(rec, (0.0, 1.0))
    assert v.n_maxima == 10
    assert v.n_minima == 10


def test_smoothing_suppresses_spikes():
    p = _cosine(XS, 0.5, 0.2)
    p[3137] += 5.0
    raw = visibility(_record(XS, p), (0.1, 0.9)).value
    smooth = visibility(_record(XS, p), (0.1, 0.9),
                        smooth_width=0.01).value
    assert raw > 0.8
    assert smooth < 0.65
    assert smooth == pytest.approx(0.5, abs=0.1)


def test_tiny_window_rejected():
    rec = _record(XS, _cosine(XS, 0.5, 0.05))
    with pytest.raises(ConfigError, match="fewer than 8"):
        visibility(rec, (0.5, 0.5004))


# ---------------------------------------------------------------------------
# correlation


def test_self_correlation_is_one():
    p = _cosine(XS, 0.5, 0.07)
    assert pattern_correlation(p, p) == pytest.approx(1.0, rel=1e-14)


def test_inverted_correlation_is_minus_one():
    p = _cosine(XS, 0.5, 0.07)
    assert pattern_correlation(p, 3.0 - p) == pytest.approx(-1.0, rel=1e-14)


def test_correlation_ignores_offset_and_scale():
    p = _cosine(XS, 0.5, 0.07)
    assert pattern_correlation(p, 0.2 + 4.0 * p) == pytest.approx(1.0,
                                                                  rel=1e-12)


def test_constant_correlation_rejected():
    p = _cosine(XS, 0.5, 0.07)
    with pytest.raises(NumericsError, match="constant pattern"):
        pattern_correlation(p, np.full_like(p, 2.0))


def test_correlation_shape_mismatch():
    with pytest.raises(ConfigError, match="shapes differ"):
        pattern_correlation(np.ones(10), np.ones(11))


# ---------------------------------------------------------------------------
# decomposition and its coherence bound


def _two_source_amplitudes(xs, k=180.0, d=0.6, s1=0.35, s2=0.65):
    r1 = np.hypot(xs - s1, d)
    r2 = np.hypot(xs - s2, d)
    a1 = np.exp(1j * k * r1) / np.sqrt(r1)
    a2 = np.exp(1j * k * r2) / np.sqrt(r2)
    return a1, a2


def test_decomposition_recovers_cross_term():
    a1, a2 = _two_source_amplitudes(XS)
    p_both = np.abs(a1 + a2) ** 2
    p1 = np.abs(a1) ** 2
    p2 = np.abs(a2) ** 2
    dec = decompose_interference(p_both, p1, p2)
    assert dec.p_int == pytest.approx(2.0 * np.real(a1 * np.conj(a2)),
                                      abs=1e-12)
    assert dec.cs_excess == 0.0
    assert np.all(np.abs(dec.p_int) <= dec.cs_bound + 1e-12)


def test_decomposition_flags_violations():
    p1 = np.full(50, 0.1)
    p2 = np.full(50, 0.1)
    p_both = p1 + p2 + 0.5  # cross term 0.5 > 2 sqrt(0.01) = 0.2
    dec = decompose_interference(p_both, p1, p2)
    assert dec.cs_excess == pytest.approx(0.3, abs=1e-12)


def test_decomposition_shape_guard():
    with pytest.raises(ConfigError, match="shapes differ"):
        decompose_interference(np.ones(5), np.ones(5), np.ones(6))


def test_decomposition_rejects_negative_singles():
    p = np.ones(10)
    bad = np.ones(10)
    bad[3] = -0.1
    with pytest.raises(ConfigError, match="nonnegative"):
        decompose_interference(p, bad, p)


def test_two_source_fringe_spacing():
    # far-field spacing of two coherent line sources: wavelength * D / s.
    # The screen sits far enough away (D = 2.0 for s = 0.3) that the
    # small-angle formula holds across the whole window.  The central
    # fringe peaks exactly midway between two samples, so the detector
    # tolerates a two-sample plateau.
    k, d, s = 600.0, 2.0, 0.3
    a1, a2 = _two_source_amplitudes(XS, k=k, d=d)
    p = np.abs(a1 + a2) ** 2
    sel = (XS > 0.3) & (XS < 0.7)
    xs = XS[sel]
    ps = p[sel]
    idx = np.flatnonzero((ps[1:-1] > ps[:-2]) & (ps[1:-1] >= ps[2:])) + 1
    spacing = np.diff(xs[idx])
    want = (2 * math.pi / k) * d / s
    assert spacing.size >= 3
    assert np.mean(spacing) == pytest.approx(want, rel=0.05)


def test_two_source_center_visibility():
    a1, a2 = _two_source_amplitudes(XS)
    rec = _record(XS, np.abs(a1 + a2) ** 2)
    v = visibility(rec, (0.35, 0.65))
    assert v.value > 0.95


def test_single_source_has_no_cross_term():
    a1, _ = _two_source_amplitudes(XS)
    p1 = np.abs(a1) ** 2
    dec = decompose_interference(p1, p1, np.zeros_like(p1))
    assert dec.p_int == pytest.approx(np.zeros_like(p1), abs=1e-14)


# ---------------------------------------------------------------------------
# film accumulation from snapshots


def _grid(nx=32, ny=16):
    return GridSpec(nx=nx, ny=ny, dx=1.0 / nx, dy=1.0 / ny, dt=0.05)


def test_accumulate_weights_by_time_gaps():
    grid = _grid()
    row = 4
    psi_a = np.zeros((16, 32), dtype=complex)
    psi_b = np.zeros((16, 32), dtype=complex)
    psi_a[row, :] = 1.0
    psi_b[row, :] = 2.0
    fields = [WaveField(psi=psi_a, t=0.1), WaveField(psi=psi_b, t=0.3),
              WaveField(psi=psi_a, t=0.4)]
    rec = accumulate_film(fields, film_row=row, window=(0.0, 1.0), grid=grid)
    # gaps 0.2, 0.1, last reuses 0.1: 0.2*1 + 0.1*4 + 0.1*1 = 0.7 per cell
    assert rec.p == pytest.approx(np.full(32, 0.7), rel=1e-12)
    assert rec.absorbed == pytest.approx(0.7 * grid.dx * 32, rel=1e-12)


def test_accumulate_rescales_to_absorbed():
    grid = _grid()
    psi = np.zeros((16, 32), dtype=complex)
    psi[4, :] = 1.0
    rec = accumulate_film([WaveField(psi=psi, t=0.5)], film_row=4,
                          window=(0.0, 1.0), grid=grid, absorbed=0.25)
    assert float(np.sum(rec.p)) * grid.dx == pytest.approx(0.25, rel=1e-12)
    assert rec.absorbed == 0.25


def test_accumulate_skips_samples_outside_window():
    grid = _grid()
    psi = np.zeros((16, 32), dtype=complex)
    psi[4, :] = 1.0
    fields = [WaveField(psi=psi, t=0.1), WaveField(psi=3.0 * psi, t=0.9)]
    rec = accumulate_film(fields, film_row=4, window=(0.0, 0.5), grid=grid)
    assert rec.p == pytest.approx(np.full(32, grid.dt), rel=1e-12)


def test_accumulate_empty_window_errors():
    grid = _grid()
    with pytest.raises(ConfigError, match="empty film window"):
        accumulate_film([], film_row=4, window=(0.5, 0.5), grid=grid)


def test_accumulate_no_samples_errors():
    grid = _grid()
    psi = np.zeros((16, 32), dtype=complex)
    with pytest.raises(NumericsError, match="no field samples"):
        accumulate_film([WaveField(psi=psi, t=2.0)], film_row=4,
                        window=(0.0, 1.0), grid=grid)


def test_recorder_validates_arguments():
    class _FakePotential:
        grid = _grid()
        film_row = 4

    with pytest.raises(ConfigError, match="cadence"):
        FilmRecorder(_FakePotential(), window=(0.0, 1.0), cadence=0)
    with pytest.raises(ConfigError, match="empty film window"):
        FilmRecorder(_FakePotential(), window=(1.0, 1.0))


def test_empty_recorder_refuses_to_finalize():
    class _FakePotential:
        grid = _grid()
        film_row = 4

    rec = FilmRecorder(_FakePotential(), window=(0.0, 1.0))
    with pytest.raises(NumericsError, match="film record is empty"):
        rec.finalize()


# ---------------------------------------------------------------------------
# visibility per subwindow


def test_visibility_series_mixed_subwindows():
    fringed = _cosine(XS, 1.0, 0.05)
    flat = np.ones_like(XS)
    rec = _record(XS, fringed + flat, subwindows=[fringed, flat])
    vals = visibility_series(rec, (0.2, 0.8))
    assert vals[0] == pytest.approx(1.0, abs=1e-3)
    assert math.isnan(vals[1])
