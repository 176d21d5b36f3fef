"""Shared fixtures: the acceptance verdict ledger and the session-scoped
golden simulation runs that several test modules share."""

import json
import os
import subprocess
import sys
from contextlib import contextmanager
from importlib import resources

import pytest

VERDICTS = []


@contextmanager
def criterion(name):
    """Collect one PASS/FAIL verdict line for the terminal summary.

    The test body fills info["detail"] with the measured numbers before
    its asserts so a failure still reports what was seen.
    """
    info = {"detail": ""}
    try:
        yield info
    except BaseException as exc:
        reason = info["detail"] or f"{type(exc).__name__}: {exc}"
        VERDICTS.append(("FAIL", name, reason))
        raise
    VERDICTS.append(("PASS", name, info["detail"]))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for mark, name, detail in VERDICTS:
        suffix = f"  |  {detail}" if detail else ""
        terminalreporter.write_line(f"{mark}  {name}{suffix}")


def config_path(name: str) -> str:
    return str(resources.files("qbil").joinpath("configs", name))


def load_json(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def small_config_text(seal1=False, seal2=False, n_steps=300) -> str:
    """A fast, fully legal simulate config (96x144 grid, ~1 s runtime)."""
    return f"""\
[geometry]
wall_skin = 0.05
slit_width = 0.16
box_depth = 0.6
film_offset = 0.3

[grid]
nx = 96
ny = 144
dt = 0.0001
dt_max_factor = 1.0

[packet]
x0 = 0.42
y0 = 0.25
sigma = 0.045
kx = 0.0
ky = -30.0

[run]
n_steps = {n_steps}
window_start = 0.0
window_end = 0.03
seal_slit_1 = {"true" if seal1 else "false"}
seal_slit_2 = {"true" if seal2 else "false"}

[analysis]
film_window_lo = 0.25
film_window_hi = 0.75
smooth_width = 0.02
n_subwindows = 0
"""


def _simulate(tmp_path_factory, cfg_name, slug):
    from qbil.config import load_config
    from qbil.runner import run_simulate

    cfg = load_config(config_path(cfg_name))
    out = tmp_path_factory.mktemp(slug)
    run_simulate(cfg, out, force=True)
    return out


@pytest.fixture(scope="session")
def golden_straight_dir(tmp_path_factory):
    return _simulate(tmp_path_factory, "golden_straight.cfg",
                     "golden-straight")


@pytest.fixture(scope="session")
def golden_curved_dir(tmp_path_factory):
    return _simulate(tmp_path_factory, "golden_curved.cfg", "golden-curved")


@pytest.fixture(scope="session")
def golden_straight_rerun_dir(tmp_path_factory):
    """The same golden run, in a fresh process with two compute threads."""
    out = tmp_path_factory.mktemp("golden-straight-t2")
    env = dict(os.environ, NUMBA_NUM_THREADS="2")
    proc = subprocess.run(
        [sys.executable, "-m", "qbil.cli", "simulate",
         "--config", config_path("golden_straight.cfg"),
         "--out", str(out), "--force"],
        capture_output=True, text=True, env=env, timeout=1800)
    assert proc.returncode == 0, proc.stderr[-2000:]
    return out
