"""Unit coverage for the CSV readers and the figure builders."""

import numpy as np
import pytest

import render
from render import (
    SchemaMismatch,
    plot_convergence,
    plot_effectivity,
    plot_estimator_curve,
    plot_sweep,
    read_columns,
)


def test_read_columns_splits_comments_and_data(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text("# strategy=algorithm2\n# converged=True\na,b\n1,2\n3,\n")
    comments, cols = read_columns(path)
    assert comments == ["strategy=algorithm2", "converged=True"]
    assert cols == {"a": ["1", "3"], "b": ["2", ""]}


def test_empty_file_is_schema_mismatch(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("# nothing but comments\n")
    with pytest.raises(SchemaMismatch, match="no header row"):
        read_columns(path)


def test_missing_column_named(tmp_path):
    path = tmp_path / "curve.csv"
    path.write_text("omega,residual_dual_norm\n0.6,1.0\n")
    with pytest.raises(SchemaMismatch, match="missing column 'state_estimate'"):
        plot_estimator_curve(path)


def test_non_numeric_value_named(tmp_path):
    path = tmp_path / "trace.csv"
    path.write_text("iter,omega,xi\n1,0.6,abc\n")
    with pytest.raises(SchemaMismatch, match="non-numeric value 'abc' in column 'xi'"):
        plot_convergence(path)


def test_effectivity_needs_true_values(tmp_path):
    path = tmp_path / "trace.csv"
    path.write_text("iter,omega,xi,eps_true\n1,0.6,0.5,\n2,0.7,0.1,\n")
    with pytest.raises(SchemaMismatch, match="'eps_true' holds no usable values"):
        plot_effectivity(path)


def test_all_blank_estimate_column_named(tmp_path):
    path = tmp_path / "curve.csv"
    path.write_text(
        "omega,residual_dual_norm,state_estimate,infsup,bound\n0.6,1.0,,0.5,2.0\n"
    )
    with pytest.raises(SchemaMismatch, match="'state_estimate' holds no usable values"):
        plot_estimator_curve(path)


def test_convergence_from_compare_three_series(artifacts):
    fig = plot_convergence(artifacts / "compare.csv")
    labels = [line.get_label() for line in fig.axes[0].get_lines()]
    assert labels == ["algorithm1", "algorithm2", "residual_baseline"]
    assert fig.axes[0].get_yscale() == "log"


def test_convergence_single_trace_overlays_truth(artifacts):
    fig = plot_convergence(artifacts / "trace_algorithm2.csv")
    labels = [line.get_label() for line in fig.axes[0].get_lines()]
    assert labels == ["algorithm2", "algorithm2 (true)"]


def test_estimator_curve_shares_frequency_axis(artifacts):
    fig = plot_estimator_curve(artifacts / "curve_algorithm2.csv")
    ax = fig.axes[0]
    labels = [line.get_label() for line in ax.get_lines()]
    assert "residual dual norm" in labels
    assert "state estimate" in labels
    assert ax.get_yscale() == "log"
    # both series span the same 201-point band
    lengths = {len(line.get_xdata()) for line in ax.get_lines()}
    assert 201 in lengths


def test_sweep_magnitude_positive(artifacts):
    fig = plot_sweep(artifacts / "sweep.csv")
    y = fig.axes[0].get_lines()[0].get_ydata()
    assert len(y) == 201
    assert np.all(y > 0)


def test_main_renders_and_reports(artifacts, tmp_path, capsys):
    out = tmp_path / "fig.png"
    rc = render.main(["--kind", "sweep", "--in", str(artifacts / "sweep.csv"),
                      "--out", str(out)])
    assert rc == 0
    assert out.stat().st_size > 0
    assert f"wrote {out}" in capsys.readouterr().out


def test_main_schema_error_exits_nonzero(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("")
    rc = render.main(["--kind", "convergence", "--in", str(bad),
                      "--out", str(tmp_path / "fig.png")])
    assert rc == 1
    assert "error:" in capsys.readouterr().err


def test_main_missing_file_exits_nonzero(tmp_path, capsys):
    rc = render.main(["--kind", "sweep", "--in", str(tmp_path / "nope.csv"),
                      "--out", str(tmp_path / "fig.png")])
    assert rc == 1
    assert "error:" in capsys.readouterr().err


def test_rendering_is_pure(artifacts, tmp_path):
    outs = [tmp_path / "a.png", tmp_path / "b.png"]
    for out in outs:
        rc = render.main(["--kind", "convergence",
                          "--in", str(artifacts / "trace_algorithm2.csv"),
                          "--out", str(out)])
        assert rc == 0
    assert outs[0].read_bytes() == outs[1].read_bytes()
