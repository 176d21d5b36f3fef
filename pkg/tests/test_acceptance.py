"""Acceptance suite: one test per headline requirement.

Each test wraps its assertions in criterion(), so the run ends with a
PASS/FAIL line per requirement in the terminal summary, carrying the
measured numbers either way.
"""

import math

import numpy as np
import pytest

from conftest import criterion, load_json
from qbil.classical import RayState, direction_census, lyapunov_exponent
from qbil.config import load_config
from qbil.geometry import (GridSpec, PotentialField, build_apparatus,
                           grid_for_apparatus, rasterize_potential)
from qbil.poles import Beta0, decoherence_time
from qbil.sid import dense_gaussian_state, rl_decay_scan, sparse_state
from qbil.solver import (GaussianPacketSpec, ProbeRecorder, WaveField,
                         evolve, free_spread_width, init_gaussian, norm,
                         position_spread)
from qbil.spectral import billiard_spectrum, poincare_time


def _summary(run_dir):
    return load_json(run_dir / "summary.json")


def _fmt(x):
    return "missing" if x is None else f"{x:.4f}"


def test_fringe_existence(golden_straight_dir):
    with criterion("1 fringe existence (straight run)") as info:
        summary = _summary(golden_straight_dir)
        manifest = load_json(golden_straight_dir / "manifest.json")
        cfg = load_config(str(golden_straight_dir / "effective.cfg"))
        nx, ny = cfg["grid"]["nx"], cfg["grid"]["ny"]
        v = summary.get("visibility")
        corr = summary.get("halves_correlation")
        wall = manifest["wall_seconds"]
        info["detail"] = (f"V = {_fmt(v)} (>= 0.5), halves corr = "
                          f"{_fmt(corr)} (>= 0.95), grid {nx}x{ny}, "
                          f"{wall:.0f} s")
        assert nx <= 512 and ny <= 512
        assert wall < 900.0
        assert v is not None and v >= 0.5
        assert corr is not None and corr >= 0.95


def test_decoherence_contrast(golden_straight_dir, golden_curved_dir):
    with criterion("2 decoherence contrast (arc vs straight)") as info:
        cfg_s = load_config(str(golden_straight_dir / "effective.cfg"))
        cfg_c = load_config(str(golden_curved_dir / "effective.cfg"))
        for section in ("grid", "packet", "run", "analysis"):
            assert cfg_s[section] == cfg_c[section], section
        v_s = _summary(golden_straight_dir).get("visibility")
        v_c = _summary(golden_curved_dir).get("visibility")
        info["detail"] = f"V_straight = {_fmt(v_s)}, V_curved = {_fmt(v_c)}"
        assert v_s is not None and v_c is not None
        ratio = v_c / v_s
        info["detail"] += f", ratio = {ratio:.3f} (<= 0.5)"
        assert v_c <= 0.5 * v_s


def test_decoherence_time_scale():
    with criterion("3 damping time for a desktop cavity") as info:
        mass = 9.109e-31
        hbar = 1.0546e-34
        beta = Beta0(R0=1.728, I0=1.0)
        scale = decoherence_time(beta, 1e-2, mass=mass, hbar=hbar)
        unbounded = decoherence_time(beta, math.inf, mass=mass, hbar=hbar)
        info["detail"] = (f"t_d = {scale.t_d:.6f} s (1.00 +- 1%), "
                          f"open cavity t_d = {unbounded.t_d}")
        assert scale.t_d == pytest.approx(1.0, rel=0.01)
        assert unbounded.t_d == math.inf
        assert unbounded.gamma == 0.0


def test_recurrence_time():
    with criterion("4 recurrence time scale") as info:
        tp = poincare_time([1.0, 2.0])
        geom = build_apparatus({"hypotenuse": "straight"})
        spec = billiard_spectrum(geom, 256, K=2)
        want = 5 * math.pi ** 2 / 2
        rel = abs(spec.levels[0] - want) / want
        info["detail"] = (f"two-level t_P = {tp!r} (= 2 pi exactly), "
                          f"ground level off by {rel:.2e} (< 1%)")
        assert tp == math.tau
        assert rel < 0.01


def test_mode_density_dichotomy():
    with criterion("5 interference decay: dense vs sparse modes") as info:
        dense = dense_gaussian_state(1.0)
        scan_d = rl_decay_scan(dense, 0.7, 50.0, 48)
        analytic = scan_d.e0 * np.exp(-scan_d.centers ** 2 / 2.0)
        resolvable = analytic >= 1e-4 * scan_d.e0
        devs = np.abs(scan_d.envelope[resolvable] / analytic[resolvable]
                      - 1.0)
        sparse = sparse_state(1.0, 4)
        scan_s = rl_decay_scan(sparse, 0.7, 50.0, 48)
        tail_d = scan_d.envelope[-1] / scan_d.e0
        tail_s = scan_s.envelope[-1] / scan_s.e0
        info["detail"] = (
            f"{dense.n_modes}-mode tail = {tail_d:.2e} (< 1e-3), gaussian "
            f"envelope off by {devs.max():.3f} max over {devs.size} points "
            f"(< 0.05); {sparse.n_modes}-mode tail = {tail_s:.2f} (> 0.1)")
        assert dense.n_modes == 1000
        assert scan_d.decays
        assert tail_d < 1e-3
        assert devs.size >= 10
        assert devs.max() < 0.05
        assert not scan_s.decays
        assert tail_s > 0.1


def test_classical_dichotomy():
    with criterion("6 ray chaos: straight flat, arc mixing") as info:
        straight = build_apparatus({"hypotenuse": "straight"})
        arc = build_apparatus({"hypotenuse": "arc", "sagitta": 0.06})
        start = RayState(0.3, 0.4, 0.7)
        lam_s = lyapunov_exponent(straight, start, 10_000).exponent
        lam_a = lyapunov_exponent(arc, start, 10_000).exponent
        census_s = len(direction_census(straight, start, 10_000))
        census_a = [len(direction_census(arc, start, n))
                    for n in (200, 400, 800)]
        info["detail"] = (
            f"lambda straight = {lam_s:.2e} (|.| < 1e-3), arc = {lam_a:.3f} "
            f"(> 0); census straight = {census_s} (<= 8), arc = "
            f"{census_a[0]} -> {census_a[1]} -> {census_a[2]} (growing)")
        assert abs(lam_s) < 1e-3
        assert lam_a > 0.0
        assert census_s <= 8
        assert census_a[0] < census_a[1] < census_a[2]


def test_solver_physics():
    with criterion("7 propagator conservation laws") as info:
        geom = build_apparatus({"wall_skin": 0.05, "slit_width": 0.06,
                                "box_depth": 0.6, "film_offset": 0.3})
        grid = grid_for_apparatus(geom, 96, 224, dt=1e-4)
        pot = rasterize_potential(geom, grid, sealed_slits=(0, 1))
        spec = GaussianPacketSpec(0.32, 0.32, 0.05, kx=18.0, ky=-25.0)

        f0 = init_gaussian(spec, grid, pot)
        probe = ProbeRecorder(grid, cadence=100, with_energy=False)
        evolve(f0, pot, 2000, recorders=(probe,))
        norms = np.asarray(probe.norms)
        drift_per_1000 = float(np.max(np.abs(norms - norms[0]))) / 2.0

        f0 = init_gaussian(spec, grid, pot)
        psi0 = f0.psi.copy()
        fwd = evolve(f0, pot, 600)
        ret = evolve(WaveField(psi=np.conj(fwd.field.psi)), pot, 600)
        final = np.conj(ret.field.psi)
        w = grid.dx * grid.dy
        fid = (abs(np.vdot(psi0, final)) ** 2 * w * w
               / (norm(WaveField(psi=psi0), grid)
                  * norm(WaveField(psi=final), grid)))

        fgrid = GridSpec(nx=128, ny=128, dx=1.0 / 128, dy=1.0 / 128,
                         dt=4e-5, x0=-0.5, y0=-0.5)
        z = np.zeros((128, 128))
        free_pot = PotentialField(grid=fgrid, geom=None, U=z, W=z.copy(),
                                  dirichlet=np.zeros_like(z, dtype=bool),
                                  domain=np.zeros_like(z, dtype=np.uint8),
                                  film_row=0)
        packet = init_gaussian(GaussianPacketSpec(0.0, 0.0, 0.06), fgrid)
        res = evolve(packet, free_pot, 201)
        want = free_spread_width(0.06, res.field.t, fgrid.mass, fgrid.hbar)
        got = position_spread(res.field, fgrid)
        spread_err = abs(got / want - 1.0)

        info["detail"] = (
            f"norm drift {drift_per_1000:.1e} per 1000 steps (< 1e-8), "
            f"spreading off by {spread_err:.2e} (< 1%), reversal fidelity "
            f"1 - {1.0 - fid:.1e} (> 1 - 1e-6)")
        assert drift_per_1000 < 1e-8
        assert spread_err < 0.01
        assert fid > 1.0 - 1e-6


def test_determinism(golden_straight_dir, golden_straight_rerun_dir):
    with criterion("8 bit-identical reruns across thread counts") as info:
        m1 = load_json(golden_straight_dir / "manifest.json")
        m2 = load_json(golden_straight_rerun_dir / "manifest.json")
        same = m1["files"] == m2["files"]
        info["detail"] = (
            f"{len(m1['files'])} files checksummed, in-process single "
            f"thread vs subprocess with 2 threads: "
            f"{'identical' if same else 'DIFFER'}")
        assert set(m1["files"]) == set(m2["files"])
        assert same
