"""End-to-end experiment runs: build, propagate, measure, write.

Every subcommand lands in one output directory containing the resolved
config (effective.cfg), data files (CSV with 17-significant-digit floats,
JSON summaries), and a manifest.json with sha256 checksums of every data
file. Reruns of the same config produce byte-identical data files; the
manifest additionally records wall-clock timing and is the one file
excluded from that guarantee.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import ExperimentConfig, resolve
from .errors import ConfigError, IoFormatError
from .geometry import (build_apparatus, grid_for_apparatus,
                       rasterize_potential)
from . import classical as cl
from . import poles as pl
from . import sid as sd
from . import spectral as sp
from .screen import (FilmRecorder, decompose_interference,
                     pattern_correlation, visibility, visibility_series)
from .snapshots import SnapshotRecorder
from .solver import (GaussianPacketSpec, ProbeRecorder, evolve,
                     init_gaussian)


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return format(v, ".17g")


def write_csv(path: Path, names, columns) -> None:
    columns = [np.asarray(c) for c in columns]
    n = columns[0].shape[0]
    for c in columns:
        if c.shape[0] != n:
            raise IoFormatError("csv columns differ in length")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(names) + "\n")
        for i in range(n):
            fh.write(",".join(_fmt(c[i]) for c in columns) + "\n")


def read_csv(path: Path):
    """(names, columns) from a CSV written by write_csv."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = [ln.strip() for ln in fh if ln.strip()]
    except OSError as exc:
        raise IoFormatError(f"cannot read {path}: {exc}") from None
    if not lines:
        raise IoFormatError(f"{path}: empty csv")
    names = lines[0].split(",")
    rows = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != len(names):
            raise IoFormatError(
                f"{path}: row has {len(parts)} fields, header has {len(names)}")
        rows.append([float(p) for p in parts])
    if not rows:
        raise IoFormatError(f"{path}: csv has a header but no rows")
    data = np.asarray(rows, dtype=float)
    return names, [data[:, j] for j in range(len(names))]


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def resolve_out_dir(out, force: bool = False) -> Path:
    """Create the output directory, honoring QBIL_OUTPUT_ROOT for
    relative paths. An existing nonempty directory needs force."""
    out = Path(out)
    if not out.is_absolute():
        root = os.environ.get("QBIL_OUTPUT_ROOT")
        if root:
            out = Path(root) / out
    if out.exists():
        if not out.is_dir():
            raise IoFormatError(f"output path {out} is not a directory")
        if any(out.iterdir()) and not force:
            raise IoFormatError(
                f"output directory {out} is not empty; pass force to reuse")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_manifest(out: Path, command: str, cfg_text: str,
                    wall_seconds: float, extras: dict | None = None) -> None:
    files = {}
    for p in sorted(out.iterdir()):
        if p.name == "manifest.json" or p.is_dir():
            continue
        files[p.name] = _sha256(p)
    manifest = {
        "command": command,
        "package_version": __version__,
        "numpy_version": np.__version__,
        "wall_seconds": wall_seconds,
        "files": files,
        "config": cfg_text,
    }
    if extras:
        manifest.update(extras)
    with open(out / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _prepared(cfg: ExperimentConfig):
    cfg = resolve(cfg)
    geom = build_apparatus(cfg["geometry"])
    g = cfg["grid"]
    grid = grid_for_apparatus(geom, g["nx"], g["ny"], dt=g["dt"],
                              hbar=g["hbar"], mass=g["mass"])
    sealed = []
    if cfg["run"]["seal_slit_1"]:
        sealed.append(0)
    if cfg["run"]["seal_slit_2"]:
        sealed.append(1)
    potential = rasterize_potential(geom, grid, sealed_slits=tuple(sealed))
    return cfg, geom, grid, potential


def run_simulate(cfg: ExperimentConfig, out, force: bool = False) -> Path:
    """Propagate the packet and write the film record and probes."""
    t0 = time.perf_counter()
    out = resolve_out_dir(out, force)
    cfg, geom, grid, potential = _prepared(cfg)
    p = cfg["packet"]
    packet = GaussianPacketSpec(x0=p["x0"], y0=p["y0"], sigma=p["sigma"],
                                kx=p["kx"], ky=p["ky"])
    field = init_gaussian(packet, grid, potential)

    r = cfg["run"]
    a = cfg["analysis"]
    film = FilmRecorder(potential, (r["window_start"], r["window_end"]),
                        cadence=r["film_cadence"],
                        n_subwindows=a["n_subwindows"])
    probes = ProbeRecorder(grid, cadence=r["probe_cadence"])
    recorders = [film, probes]
    if r["snapshot_cadence"] > 0:
        snap_dir = out / "snapshots"
        snap_dir.mkdir(exist_ok=True)
        recorders.append(SnapshotRecorder(str(snap_dir), grid.dx, grid.dy,
                                          r["snapshot_cadence"]))
    evolve(field, potential, r["n_steps"], recorders=recorders,
           nan_check_cadence=r["nan_check_cadence"])

    record = film.finalize()
    write_csv(out / "pattern.csv", ["x", "p"], [record.xs, record.p])
    write_csv(out / "film_halves.csv", ["x", "p_first", "p_second"],
              [record.xs, record.p_half_first, record.p_half_second])
    write_csv(out / "probes.csv", ["t", "norm", "energy", "box_mass"],
              [probes.times, probes.norms, probes.energies, probes.box_mass])

    summary = {
        "absorbed_below_film": record.absorbed,
        "final_norm": probes.norms[-1] if probes.norms else float("nan"),
        "film_window": list(record.window),
        "sealed_slits": list(potential.sealed_slits),
        "hypotenuse": geom.hypotenuse,
    }
    window = (a["film_window_lo"], a["film_window_hi"])
    try:
        vis = visibility(record, window, smooth_width=a["smooth_width"])
        summary["visibility"] = vis.value
        summary["n_extrema"] = vis.n_maxima + vis.n_minima
    except Exception as exc:  # record analysis failures, do not hide data
        summary["visibility"] = None
        summary["visibility_error"] = str(exc)
    try:
        summary["halves_correlation"] = pattern_correlation(
            record.p_half_first, record.p_half_second)
    except Exception as exc:
        summary["halves_correlation"] = None
        summary["halves_error"] = str(exc)
    if record.subwindows:
        series = visibility_series(record, window, a["smooth_width"])
        t_a, t_b = record.window
        n = len(series)
        mids = [t_a + (k + 0.5) * (t_b - t_a) / n for k in range(n)]
        write_csv(out / "visibility_series.csv",
                  ["t_mid", "visibility"], [mids, series])

    _write_json(out / "summary.json", summary)
    with open(out / "effective.cfg", "w", encoding="utf-8") as fh:
        fh.write(cfg.echo())
    _write_manifest(out, "simulate", cfg.echo(), time.perf_counter() - t0)
    return out


def run_analyze(both_dir, only1_dir, only2_dir, out,
                force: bool = False) -> Path:
    """Decompose a two-slit record into single-slit parts plus cross term."""
    t0 = time.perf_counter()
    out = resolve_out_dir(out, force)
    runs = {}
    for name, d in (("both", both_dir), ("only1", only1_dir),
                    ("only2", only2_dir)):
        d = Path(d)
        names, cols = read_csv(d / "pattern.csv")
        if names[:2] != ["x", "p"]:
            raise IoFormatError(f"{d}/pattern.csv: expected columns x,p")
        runs[name] = (cols[0], cols[1])
    xs = runs["both"][0]
    for name in ("only1", "only2"):
        if runs[name][0].shape != xs.shape or not np.allclose(
                runs[name][0], xs, rtol=0, atol=1e-12):
            raise ConfigError(
                f"run {name!r} uses a different film grid; "
                "analysis needs matching runs")
    dec = decompose_interference(runs["both"][1], runs["only1"][1],
                                 runs["only2"][1])
    write_csv(out / "decomposed.csv", ["x", "p", "p1", "p2", "p_int"],
              [xs, runs["both"][1], runs["only1"][1], runs["only2"][1],
               dec.p_int])
    scale = float(np.max(runs["both"][1]))
    payload = {
        "cs_excess": dec.cs_excess,
        "cs_excess_relative": dec.cs_excess / scale if scale > 0 else None,
        "max_abs_p_int": float(np.max(np.abs(dec.p_int))),
        "pattern_peak": scale,
    }
    _write_json(out / "analysis.json", payload)
    _write_manifest(out, "analyze", "", time.perf_counter() - t0)
    return out


def run_classical(cfg: ExperimentConfig, out, force: bool = False) -> Path:
    """Ray tracing, stretching rate, direction census, twin deviation."""
    t0 = time.perf_counter()
    out = resolve_out_dir(out, force)
    cfg = resolve(cfg)
    geom = build_apparatus(cfg["geometry"])
    c = cfg["classical"]
    state = cl.RayState(x=c["x"], y=c["y"], theta=c["theta"])

    traj = cl.trace_trajectory(geom, state, c["n_bounces"])
    write_csv(out / "trajectory.csv", ["k", "x", "y", "theta", "wall"],
              [np.arange(traj.points.shape[0]),
               traj.points[:, 0], traj.points[:, 1], traj.thetas,
               np.concatenate([[255], traj.walls])])

    lam = cl.lyapunov_exponent(geom, state, c["n_bounces"],
                               offset=c["offset"])
    census = cl.direction_census(geom, state, c["n_bounces"])
    dev = cl.parallel_deviation(geom, state, c["deviation_offset"],
                                c["deviation_bounces"])
    write_csv(out / "deviation.csv", ["path", "dpos", "dtheta"],
              [dev.path, dev.dpos, dev.dtheta])
    _write_json(out / "classical.json", {
        "lyapunov_per_length": lam.exponent,
        "n_renormalizations": lam.n_renormalizations,
        "path_length": lam.path_length,
        "n_directions": len(census),
        "n_bounces": c["n_bounces"],
        "hypotenuse": geom.hypotenuse,
    })
    with open(out / "effective.cfg", "w", encoding="utf-8") as fh:
        fh.write(cfg.echo())
    _write_manifest(out, "classical", cfg.echo(), time.perf_counter() - t0)
    return out


def run_spectrum(cfg: ExperimentConfig, out, force: bool = False) -> Path:
    """Cavity levels, recurrence time, gap ratio statistic."""
    t0 = time.perf_counter()
    out = resolve_out_dir(out, force)
    cfg = resolve(cfg)
    geom = build_apparatus(cfg["geometry"])
    s = cfg["spectral"]
    g = cfg["grid"]
    spec = sp.billiard_spectrum(geom, s["n"], s["k_levels"],
                                hbar=g["hbar"], mass=g["mass"])
    write_csv(out / "spectrum.csv", ["nu", "alpha"],
              [np.arange(1, spec.levels.size + 1), spec.levels])
    window = None
    if s["window_hi"] > s["window_lo"]:
        window = (s["window_lo"], s["window_hi"])
    payload = {
        "k_levels": int(spec.levels.size),
        "lattice_n": spec.n,
        "lattice_nodes": spec.n_nodes,
        "hypotenuse": geom.hypotenuse,
    }
    try:
        payload["poincare_time"] = sp.poincare_time(
            spec.levels, hbar=g["hbar"], window=window)
    except Exception as exc:
        payload["poincare_time"] = None
        payload["poincare_error"] = str(exc)
    if spec.levels.size >= 20:
        payload["spacing_ratio"] = sp.spacing_ratio_stats(spec.levels)
    _write_json(out / "spectral.json", payload)
    with open(out / "effective.cfg", "w", encoding="utf-8") as fh:
        fh.write(cfg.echo())
    _write_manifest(out, "spectrum", cfg.echo(), time.perf_counter() - t0)
    return out


def run_poles(cfg: ExperimentConfig, out, force: bool = False) -> Path:
    """Pole location and decoherence scale, optional radius sweep."""
    t0 = time.perf_counter()
    out = resolve_out_dir(out, force)
    cfg = resolve(cfg)
    p = cfg["poles"]
    wall = pl.WallParams(U0=p["u0"], A=p["amplitude"],
                         wall_order=p["wall_order"], radius=p["radius"],
                         mass=p["mass"], hbar=p["hbar"])
    beta = pl.pole_beta0(wall)
    scale = pl.decoherence_time(beta, wall.radius, mass=wall.mass,
                                hbar=wall.hbar)
    _write_json(out / "poles.json", {
        "R0": beta.R0,
        "I0": beta.I0,
        "gamma": scale.gamma,
        "t_d": scale.t_d if math.isfinite(scale.t_d) else "inf",
        "radius": wall.radius if math.isfinite(wall.radius) else "inf",
        "gamma_times_td_over_hbar":
            (scale.gamma * scale.t_d / wall.hbar
             if math.isfinite(scale.t_d) else None),
    })
    if p["sweep"]:
        if not (0 < p["radius_min"] < p["radius_max"]):
            raise ConfigError("sweep needs 0 < radius_min < radius_max")
        if p["n_radii"] < 2:
            raise ConfigError("sweep needs n_radii >= 2")
        radii = np.geomspace(p["radius_min"], p["radius_max"], p["n_radii"])
        gammas, times = pl.radius_sweep(beta, radii, mass=wall.mass,
                                        hbar=wall.hbar)
        write_csv(out / "sweep.csv", ["radius", "gamma", "t_d"],
                  [radii, gammas, times])
    with open(out / "effective.cfg", "w", encoding="utf-8") as fh:
        fh.write(cfg.echo())
    _write_manifest(out, "poles", cfg.echo(), time.perf_counter() - t0)
    return out


def _sid_state(cfg: ExperimentConfig):
    s = cfg["sid"]
    kind = s["kind"]
    if kind == "two_mode":
        state = sd.two_mode_state(s["m0"], hbar=s["hbar"])
        scale = abs(s["m0"])
    elif kind == "sparse":
        state = sd.sparse_state(s["m0"], n_modes=max(4, min(s["n_modes"], 64)))
        scale = abs(s["m0"])
    elif kind == "dense_gaussian":
        state = sd.dense_gaussian_state(s["sigma_m"])
        scale = s["sigma_m"]
    elif kind == "sampled":
        state = sd.sampled_gaussian_state(s["sigma_m"], s["n_modes"],
                                          seed=s["seed"])
        scale = s["sigma_m"]
    elif kind == "random_blocks":
        state = sd.random_block_state(s["n_blocks"],
                                      max(2, s["n_modes"] // s["n_blocks"]),
                                      seed=s["seed"],
                                      weight_profile=s["weight_profile"])
        scale = 1.0
    else:
        raise ConfigError(f"unknown sid kind {kind!r}")
    return state, scale


def run_sid(cfg: ExperimentConfig, out, force: bool = False) -> Path:
    """Interference pattern and decay scan of a stationary state."""
    t0 = time.perf_counter()
    out = resolve_out_dir(out, force)
    cfg = resolve(cfg)
    s = cfg["sid"]
    state, scale = _sid_state(cfg)
    hbar = s["hbar"]
    sep = s["separation"]
    x_max = s["x_max_over_hbar"] * hbar / scale

    scan = sd.rl_decay_scan(state, sep, x_max, s["n_points"], hbar=hbar)
    if s["kind"] == "dense_gaussian":
        analytic = scan.e0 * np.exp(
            -(s["sigma_m"] * scan.centers) ** 2 / (2.0 * hbar * hbar))
    else:
        analytic = np.full_like(scan.centers, float("nan"))
    write_csv(out / "rl_envelope.csv", ["x", "envelope", "analytic"],
              [scan.centers, scan.envelope, analytic])

    xs = np.linspace(0.0, 6.0 * math.pi * hbar / scale, 720)
    write_csv(out / "pint.csv", ["x", "p_int"],
              [xs, sd.pint_pattern(state, xs, sep, hbar=hbar)])
    _write_json(out / "sid.json", {
        "kind": s["kind"],
        "decays": scan.decays,
        "verdict": "DECAYS" if scan.decays else "PERSISTS",
        "e0": scan.e0,
        "e_last": float(scan.envelope[-1]),
        "threshold": scan.threshold,
        "x_max": x_max,
        "seed": s["seed"],
        "n_modes": state.n_modes,
        "renormalized_weights": state.renormalized,
    })
    with open(out / "effective.cfg", "w", encoding="utf-8") as fh:
        fh.write(cfg.echo())
    _write_manifest(out, "sid", cfg.echo(), time.perf_counter() - t0)
    return out
