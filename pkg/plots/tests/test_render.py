"""Fast rendering tests on synthetic csv files."""

from __future__ import annotations

import numpy as np
import pytest
from conftest import write_csv

from qbil_plots import FigureSpec, PlotsError, SchemaError, render_figure
from qbil_plots.cli import main


def test_every_kind_renders_both_formats(tmp_path, kind_inputs):
    for kind, inputs in kind_inputs.items():
        for ext in ("png", "svg"):
            out = tmp_path / f"{kind}.{ext}"
            got = render_figure(FigureSpec(kind=kind,
                                           inputs=tuple(str(p) for p in inputs),
                                           out=str(out)))
            assert got == out
            assert out.stat().st_size > 1000, f"{kind} {ext} suspiciously small"


def test_identical_inputs_identical_bytes(tmp_path, kind_inputs):
    for kind, inputs in kind_inputs.items():
        for ext in ("png", "svg"):
            outs = []
            for tag in ("one", "two"):
                out = tmp_path / f"{kind}-{tag}.{ext}"
                render_figure(FigureSpec(kind=kind,
                                         inputs=tuple(str(p) for p in inputs),
                                         out=str(out)))
                outs.append(out.read_bytes())
            assert outs[0] == outs[1], f"{kind} {ext} render is not reproducible"


def test_fringe_compare_overlays_solid_and_dotted(tmp_path, pattern_pair):
    a, b = pattern_pair
    out = tmp_path / "compare.svg"
    render_figure(FigureSpec(kind="fringe-compare",
                             inputs=(str(a), str(b)), out=str(out),
                             labels=("straight", "curved")))
    svg = out.read_text(encoding="utf-8")
    # the second curve is drawn dotted, which the svg records as a dash array
    assert "stroke-dasharray" in svg
    assert "straight" in svg
    assert "curved" in svg


def test_labels_change_output_title_too(tmp_path, pattern_pair):
    a, b = pattern_pair
    out = tmp_path / "titled.svg"
    render_figure(FigureSpec(kind="fringe-compare",
                             inputs=(str(a), str(b)), out=str(out),
                             title="hypotenuse shape comparison"))
    assert "hypotenuse shape comparison" in out.read_text(encoding="utf-8")


def test_missing_column_is_named(tmp_path, pattern_pair):
    a, _ = pattern_pair
    bad = write_csv(tmp_path / "bad.csv", "x,probability",
                    np.column_stack([[0.0, 1.0], [0.5, 0.5]]))
    out = tmp_path / "nope.png"
    with pytest.raises(SchemaError, match="missing column 'p'"):
        render_figure(FigureSpec(kind="fringe-compare",
                                 inputs=(str(a), str(bad)), out=str(out)))
    assert not out.exists(), "failed render must not leave an output file"


def test_empty_csv_rejected_without_output(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("", encoding="utf-8")
    out = tmp_path / "never.svg"
    with pytest.raises(SchemaError, match="empty csv"):
        render_figure(FigureSpec(kind="visibility-decay",
                                 inputs=(str(empty),), out=str(out)))
    assert not out.exists()


def test_header_only_csv_rejected(tmp_path):
    hdr = tmp_path / "hdr.csv"
    hdr.write_text("t_mid,visibility\n", encoding="utf-8")
    with pytest.raises(SchemaError, match="no data rows"):
        render_figure(FigureSpec(kind="visibility-decay",
                                 inputs=(str(hdr),), out=str(tmp_path / "x.png")))


def test_missing_file_rejected(tmp_path):
    with pytest.raises(SchemaError, match="not found"):
        render_figure(FigureSpec(kind="visibility-decay",
                                 inputs=(str(tmp_path / "ghost.csv"),),
                                 out=str(tmp_path / "x.png")))


def test_wrong_input_count(tmp_path, kind_inputs):
    (rl,) = kind_inputs["rl-envelope"]
    with pytest.raises(PlotsError, match="exactly 2"):
        render_figure(FigureSpec(kind="fringe-compare",
                                 inputs=(str(rl),), out=str(tmp_path / "x.png")))
    a, b = kind_inputs["fringe-compare"]
    with pytest.raises(PlotsError, match="exactly 1"):
        render_figure(FigureSpec(kind="rl-envelope",
                                 inputs=(str(a), str(b)),
                                 out=str(tmp_path / "x.png")))


def test_unknown_kind_and_bad_extension(tmp_path, kind_inputs):
    (vis,) = kind_inputs["visibility-decay"]
    with pytest.raises(PlotsError, match="unknown figure kind"):
        render_figure(FigureSpec(kind="heatmap", inputs=(str(vis),),
                                 out=str(tmp_path / "x.png")))
    with pytest.raises(PlotsError, match="unsupported output format"):
        render_figure(FigureSpec(kind="visibility-decay", inputs=(str(vis),),
                                 out=str(tmp_path / "x.gif")))


def test_label_count_must_match_inputs(tmp_path, pattern_pair):
    a, b = pattern_pair
    with pytest.raises(PlotsError, match="labels"):
        render_figure(FigureSpec(kind="fringe-compare",
                                 inputs=(str(a), str(b)),
                                 out=str(tmp_path / "x.png"),
                                 labels=("only one",)))


def test_rl_envelope_skips_absent_analytic(tmp_path):
    x = np.linspace(0.1, 20.0, 25)
    env = np.exp(-0.2 * x)
    nan = np.full_like(x, np.nan)
    csv = write_csv(tmp_path / "rl.csv", "x,envelope,analytic",
                    np.column_stack([x, env, nan]))
    out = tmp_path / "rl.svg"
    render_figure(FigureSpec(kind="rl-envelope", inputs=(str(csv),),
                             out=str(out)))
    svg = out.read_text(encoding="utf-8")
    assert "measured envelope" in svg
    assert "analytic envelope" not in svg


def test_rl_envelope_all_zero_is_an_error(tmp_path):
    x = np.linspace(0.1, 20.0, 10)
    csv = write_csv(tmp_path / "flat.csv", "x,envelope,analytic",
                    np.column_stack([x, np.zeros_like(x), np.zeros_like(x)]))
    with pytest.raises(PlotsError, match="no positive values"):
        render_figure(FigureSpec(kind="rl-envelope", inputs=(str(csv),),
                                 out=str(tmp_path / "x.png")))


def test_lyapunov_handles_zero_dtheta(tmp_path):
    path = np.linspace(1.0, 30.0, 15)
    dpos = 1e-8 * np.exp(0.5 * path)
    csv = write_csv(tmp_path / "dev.csv", "path,dpos,dtheta",
                    np.column_stack([path, dpos, np.zeros_like(path)]))
    out = tmp_path / "dev.svg"
    render_figure(FigureSpec(kind="lyapunov", inputs=(str(csv),), out=str(out)))
    svg = out.read_text(encoding="utf-8")
    assert "dpos separation" in svg
    assert "dtheta separation" not in svg


def test_inputs_never_modified(tmp_path, kind_inputs):
    for kind, inputs in kind_inputs.items():
        before = [p.read_bytes() for p in inputs]
        render_figure(FigureSpec(kind=kind,
                                 inputs=tuple(str(p) for p in inputs),
                                 out=str(tmp_path / f"ro-{kind}.png")))
        after = [p.read_bytes() for p in inputs]
        assert before == after, f"{kind} modified an input csv"


def test_cli_happy_path(tmp_path, pattern_pair, capsys):
    a, b = pattern_pair
    out = tmp_path / "cli.png"
    rc = main(["--kind", "fringe-compare", "--in", str(a), str(b),
               "--out", str(out)])
    assert rc == 0
    assert out.stat().st_size > 1000
    assert str(out) in capsys.readouterr().out


def test_cli_schema_error_exit_code(tmp_path, capsys):
    empty = tmp_path / "empty.csv"
    empty.write_text("", encoding="utf-8")
    out = tmp_path / "no.png"
    rc = main(["--kind", "visibility-decay", "--in", str(empty),
               "--out", str(out)])
    assert rc == 2
    assert not out.exists()
    assert "render: error:" in capsys.readouterr().err


def test_cli_rejects_unknown_kind(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--kind", "pie", "--in", "a.csv", "--out", "x.png"])
    assert exc.value.code == 2
    assert "invalid choice" in capsys.readouterr().err
