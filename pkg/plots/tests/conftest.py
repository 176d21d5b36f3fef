"""Shared helpers: synthetic csv writers for each figure kind."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest


def write_csv(path: Path, header: str, rows: np.ndarray) -> Path:
    lines = [header]
    for row in np.atleast_2d(rows):
        lines.append(",".join(repr(float(v)) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


@pytest.fixture()
def pattern_pair(tmp_path):
    """Two pattern csvs: a fringed one and a smooth one."""
    x = np.linspace(0.0, 1.0, 200)
    fringed = np.exp(-((x - 0.5) ** 2) / 0.05) * (1.0 + 0.8 * np.cos(60.0 * x))
    smooth = np.exp(-((x - 0.5) ** 2) / 0.05)
    (tmp_path / "first").mkdir()
    (tmp_path / "second").mkdir()
    a = write_csv(tmp_path / "first" / "pattern.csv", "x,p",
                  np.column_stack([x, fringed]))
    b = write_csv(tmp_path / "second" / "pattern.csv", "x,p",
                  np.column_stack([x, smooth]))
    return a, b


@pytest.fixture()
def kind_inputs(tmp_path, pattern_pair):
    """Map of kind -> tuple of valid input csv paths."""
    x = np.linspace(0.1, 50.0, 40)
    env = np.exp(-x * 0.3) + 1e-9
    ana = np.exp(-x * 0.3)
    rl = write_csv(tmp_path / "rl_envelope.csv", "x,envelope,analytic",
                   np.column_stack([x, env, ana]))

    t = np.linspace(0.05, 0.5, 10)
    vis = write_csv(tmp_path / "visibility_series.csv", "t_mid,visibility",
                    np.column_stack([t, np.exp(-t)]))

    nu = np.arange(1, 13, dtype=float)
    alpha = 5.0 * nu ** 1.1
    spec = write_csv(tmp_path / "spectrum.csv", "nu,alpha",
                     np.column_stack([nu, alpha]))

    path = np.cumsum(np.full(30, 1.7))
    dpos = 1e-9 * np.exp(0.7 * path)
    dth = 1e-9 * np.exp(0.68 * path)
    lya = write_csv(tmp_path / "deviation.csv", "path,dpos,dtheta",
                    np.column_stack([path, np.minimum(dpos, 4.0),
                                     np.minimum(dth, 3.0)]))

    return {
        "fringe-compare": pattern_pair,
        "visibility-decay": (vis,),
        "rl-envelope": (rl,),
        "spectrum-staircase": (spec,),
        "lyapunov": (lya,),
    }
