"""Render static figures from run-directory CSV files.

Every figure kind reads one or two CSV files produced by the qbil
command line tools, validates their column schemas up front, and only
then writes the output image.  Rendering goes through an in-memory
buffer so a failed render never leaves a truncated or zero-byte file
on disk.  With identical input files and identical options the output
bytes are identical between runs.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "FigureSpec",
    "PlotsError",
    "SchemaError",
    "KINDS",
    "render_figure",
]


class PlotsError(Exception):
    """Base class for figure-rendering failures."""


class SchemaError(PlotsError):
    """A CSV file is missing, empty, or lacks a required column."""


# columns each figure kind needs, and how many input files it takes
KINDS: dict[str, dict] = {
    "fringe-compare": {"n_inputs": 2, "columns": ("x", "p")},
    "visibility-decay": {"n_inputs": 1, "columns": ("t_mid", "visibility")},
    "rl-envelope": {"n_inputs": 1, "columns": ("x", "envelope", "analytic")},
    "spectrum-staircase": {"n_inputs": 1, "columns": ("nu", "alpha")},
    "lyapunov": {"n_inputs": 1, "columns": ("path", "dpos", "dtheta")},
}

_FORMATS = {".png": "png", ".svg": "svg"}

# fixed style so output bytes depend only on the data and the options
_RC = {
    "figure.figsize": (7.0, 4.5),
    "figure.dpi": 110.0,
    "savefig.dpi": 144.0,
    "font.family": "DejaVu Sans",
    "font.size": 10.0,
    "svg.hashsalt": "qbil-plots",
    "svg.fonttype": "none",
    "axes.grid": True,
    "grid.alpha": 0.3,
    "path.simplify": False,
}


@dataclass(frozen=True)
class FigureSpec:
    """One figure: what kind, which CSV inputs, where the image goes.

    labels, when given, must match the number of inputs; they feed the
    legend.  title overrides the default per-kind title.
    """

    kind: str
    inputs: tuple[str, ...]
    out: str
    labels: tuple[str, ...] = field(default=())
    title: str = ""


def _read_table(path: str | Path, columns: tuple[str, ...]) -> dict[str, np.ndarray]:
    p = Path(path)
    if not p.is_file():
        raise SchemaError(f"input csv not found: {p}")
    text = p.read_text(encoding="utf-8")
    if not text.strip():
        raise SchemaError(f"empty csv: {p}")
    header = [h.strip() for h in text.splitlines()[0].split(",")]
    for col in columns:
        if col not in header:
            raise SchemaError(f"{p}: missing column '{col}' (found: {', '.join(header)})")
    data = np.genfromtxt(io.StringIO(text), delimiter=",", names=True, deletechars="")
    if data.size == 0:
        raise SchemaError(f"{p}: header only, no data rows")
    data = np.atleast_1d(data)
    return {col: np.asarray(data[col], dtype=float) for col in columns}


def _check_spec(spec: FigureSpec) -> str:
    if spec.kind not in KINDS:
        known = ", ".join(sorted(KINDS))
        raise PlotsError(f"unknown figure kind '{spec.kind}' (known: {known})")
    want = KINDS[spec.kind]["n_inputs"]
    if len(spec.inputs) != want:
        raise PlotsError(
            f"kind '{spec.kind}' takes exactly {want} input csv"
            f"{'s' if want != 1 else ''}, got {len(spec.inputs)}"
        )
    if spec.labels and len(spec.labels) != len(spec.inputs):
        raise PlotsError(
            f"got {len(spec.labels)} labels for {len(spec.inputs)} inputs"
        )
    fmt = _FORMATS.get(Path(spec.out).suffix.lower())
    if fmt is None:
        raise PlotsError(
            f"unsupported output format '{Path(spec.out).suffix}' (use .png or .svg)"
        )
    return fmt


def _label(spec: FigureSpec, i: int, fallback: str) -> str:
    if spec.labels:
        return spec.labels[i]
    return fallback


def _draw_fringe_compare(ax, spec: FigureSpec, tables) -> None:
    a, b = tables
    ax.plot(a["x"], a["p"], "-", color="#1f4e8c", lw=1.4,
            label=_label(spec, 0, "run 1 (solid)"))
    ax.plot(b["x"], b["p"], ":", color="#c23b22", lw=1.8,
            label=_label(spec, 1, "run 2 (dotted)"))
    ax.set_xlabel("detector position x")
    ax.set_ylabel("accumulated probability")
    ax.set_title(spec.title or "detector film patterns")
    ax.legend()


def _draw_visibility_decay(ax, spec: FigureSpec, tables) -> None:
    t = tables[0]
    ax.plot(t["t_mid"], t["visibility"], "o-", color="#1f4e8c", lw=1.2, ms=4,
            label=_label(spec, 0, "visibility"))
    ax.set_ylim(0.0, 1.05)
    ax.set_xlabel("window midpoint time")
    ax.set_ylabel("fringe visibility")
    ax.set_title(spec.title or "fringe visibility per arrival window")
    ax.legend()


def _draw_rl_envelope(ax, spec: FigureSpec, tables) -> None:
    t = tables[0]
    pos = t["envelope"] > 0.0
    if not pos.any():
        raise PlotsError("envelope has no positive values, nothing to draw on a log axis")
    ax.semilogy(t["x"][pos], t["envelope"][pos], "o-", color="#1f4e8c",
                lw=1.2, ms=4, label=_label(spec, 0, "measured envelope"))
    ana = t["analytic"]
    good = np.isfinite(ana) & (ana > 0.0)
    if good.any():
        ax.semilogy(t["x"][good], ana[good], "--", color="#c23b22", lw=1.4,
                    label="analytic envelope")
    ax.set_xlabel("separation s")
    ax.set_ylabel("interference envelope")
    ax.set_title(spec.title or "cross-term envelope decay")
    ax.legend()


def _draw_spectrum_staircase(ax, spec: FigureSpec, tables) -> None:
    t = tables[0]
    ax.step(t["alpha"], t["nu"], where="post", color="#1f4e8c", lw=1.4,
            label=_label(spec, 0, "mode count"))
    ax.set_xlabel("eigenvalue alpha")
    ax.set_ylabel("modes with eigenvalue <= alpha")
    ax.set_title(spec.title or "cavity spectrum counting function")
    ax.legend()


def _draw_lyapunov(ax, spec: FigureSpec, tables) -> None:
    t = tables[0]
    drew = False
    for col, style, color in (("dpos", "-", "#1f4e8c"), ("dtheta", "--", "#c23b22")):
        v = t[col]
        pos = v > 0.0
        if pos.any():
            ax.semilogy(t["path"][pos], v[pos], style, color=color, lw=1.3,
                        label=f"{col} separation")
            drew = True
    if not drew:
        raise PlotsError("both separation columns are zero, nothing to draw on a log axis")
    ax.set_xlabel("path length")
    ax.set_ylabel("twin-ray separation")
    ax.set_title(spec.title or "nearby-ray divergence")
    ax.legend()


_DRAW = {
    "fringe-compare": _draw_fringe_compare,
    "visibility-decay": _draw_visibility_decay,
    "rl-envelope": _draw_rl_envelope,
    "spectrum-staircase": _draw_spectrum_staircase,
    "lyapunov": _draw_lyapunov,
}


def render_figure(spec: FigureSpec) -> Path:
    """Validate the inputs, draw the figure, write the image, return its path.

    All validation happens before the output file is touched; on any
    error the destination is left exactly as it was.
    """
    fmt = _check_spec(spec)
    columns = KINDS[spec.kind]["columns"]
    tables = [_read_table(p, columns) for p in spec.inputs]

    buf = io.BytesIO()
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        try:
            _DRAW[spec.kind](ax, spec, tables)
            fig.tight_layout()
            metadata = {"Date": None} if fmt == "svg" else None
            fig.savefig(buf, format=fmt, metadata=metadata)
        finally:
            plt.close(fig)

    out = Path(spec.out)
    try:
        out.write_bytes(buf.getvalue())
    except OSError as exc:
        raise PlotsError(f"cannot write {out}: {exc}") from exc
    return out
