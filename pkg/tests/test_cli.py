"""End-to-end verb tests driving ``main(argv)`` against temp directories."""

import numpy as np
import pytest

from rbsweep.cli import EXIT_CONFIG, EXIT_OK, EXIT_UNCONVERGED, main
from rbsweep.config import parse_config, build_model
from rbsweep.estimators import new_information_norm
from rbsweep.fom import solve_fom
from rbsweep.io import export_basis, import_basis, read_csv_columns
from rbsweep.reduction import from_vectors
from rbsweep.spectral import modal_decomposition, modal_solve


CHAIN8_CFG = """
model.kind = chain
model.n = 8
band.omega_min = 0.6
band.omega_max = 1.1
band.grid_size = 201
"""

ONE_DOF_CFG = """
model.kind = import
model.k_file = k.txt
model.m_file = m.txt
model.b_file = b.txt
band.omega_min = 0.5
band.omega_max = 1.5
band.grid_size = 101
"""


@pytest.fixture()
def chain8_cfg(tmp_path):
    path = tmp_path / "chain8.cfg"
    path.write_text(CHAIN8_CFG)
    return path


@pytest.fixture()
def one_dof_cfg(tmp_path):
    (tmp_path / "k.txt").write_text("1 1 1\n1 1 4.0\n")
    (tmp_path / "m.txt").write_text("1 1 1\n1 1 1.0\n")
    (tmp_path / "b.txt").write_text("1.0\n")
    path = tmp_path / "one.cfg"
    path.write_text(ONE_DOF_CFG)
    return path


def comments(path):
    return [l for l in path.read_text().splitlines() if l.startswith("#")]


# ---------------------------------------------------------------- greedy


def test_greedy_writes_trace_curve_basis(chain8_cfg, tmp_path):
    out = tmp_path / "out"
    rc = main(["greedy", "--config", str(chain8_cfg), "--out", str(out)])
    assert rc == EXIT_OK
    trace = out / "trace_algorithm2.csv"
    assert "# converged=True" in comments(trace)
    cols = read_csv_columns(trace)
    assert cols["iter"] == [str(i) for i in range(1, len(cols["iter"]) + 1)]
    curve = read_csv_columns(out / "curve_algorithm2.csv")
    assert len(curve["omega"]) == 201
    assert all(c != "" for c in curve["state_estimate"])
    model = build_model(parse_config(chain8_cfg))
    basis = import_basis(out / "basis_algorithm2.txt", model)
    assert basis.size == int(cols["m_primal"][-1])


def test_greedy_without_oracle_leaves_eps_true_blank(chain8_cfg, tmp_path):
    out = tmp_path / "out"
    assert main(["greedy", "--config", str(chain8_cfg), "--out", str(out)]) == EXIT_OK
    cols = read_csv_columns(out / "trace_algorithm2.csv")
    assert set(cols["eps_true"]) == {""}
    assert not any("final_eps_true" in c for c in comments(out / "trace_algorithm2.csv"))


def test_greedy_missing_config_exits_config(tmp_path, capsys):
    rc = main(["greedy", "--config", str(tmp_path / "nope.cfg"), "--out", str(tmp_path)])
    assert rc == EXIT_CONFIG
    assert "error: cannot read config" in capsys.readouterr().err


def test_greedy_budget_exhausted_exits_unconverged(chain8_cfg, tmp_path):
    cfg = tmp_path / "capped.cfg"
    cfg.write_text(CHAIN8_CFG + "greedy.max_iters = 1\n")
    out = tmp_path / "out"
    rc = main(["greedy", "--config", str(cfg), "--out", str(out)])
    assert rc == EXIT_UNCONVERGED
    # the partial trace is still written
    cols = read_csv_columns(out / "trace_algorithm2.csv")
    assert len(cols["iter"]) == 1
    assert "# converged=False" in comments(out / "trace_algorithm2.csv")


def test_greedy_unknown_strategy_in_config_exits_config(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text(CHAIN8_CFG + "greedy.strategy = newton\n")
    rc = main(["greedy", "--config", str(cfg), "--out", str(tmp_path)])
    assert rc == EXIT_CONFIG
    assert "unknown greedy.strategy" in capsys.readouterr().err


def test_greedy_same_seed_reruns_byte_identical(chain8_cfg, tmp_path):
    outs = [tmp_path / "a", tmp_path / "b"]
    for out in outs:
        rc = main(["greedy", "--config", str(chain8_cfg), "--out", str(out),
                   "--seed", "5", "--oracle"])
        assert rc == EXIT_OK
    for name in ("trace_algorithm2.csv", "curve_algorithm2.csv", "basis_algorithm2.txt"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()


# ---------------------------------------------------------------- sweep


def test_sweep_one_dof_matches_closed_form(one_dof_cfg, tmp_path):
    out = tmp_path / "out"
    assert main(["greedy", "--config", str(one_dof_cfg), "--out", str(out)]) == EXIT_OK
    rc = main(["sweep", "--config", str(one_dof_cfg), "--out", str(out),
               "--basis", str(out / "basis_algorithm2.txt")])
    assert rc == EXIT_OK
    cols = read_csv_columns(out / "sweep.csv")
    omega = np.array([float(v) for v in cols["omega"]])
    re_y = np.array([float(v) for v in cols["re_y"]])
    im_y = np.array([float(v) for v in cols["im_y"]])
    assert omega.size == 101
    # K=4, M=1, b=1: y(w) = i w / (4 - w^2), purely imaginary in band
    expected = omega / (4.0 - omega**2)
    assert np.max(np.abs(re_y)) < 1e-12
    assert np.max(np.abs(im_y - expected)) < 1e-9 * np.max(np.abs(expected))
    # one basis vector resolves a 1-DOF model exactly
    duals = np.array([float(v) for v in cols["residual_dual_norm"]])
    assert np.max(duals) < 1e-9


def test_sweep_footer_reports_timings(one_dof_cfg, tmp_path):
    out = tmp_path / "out"
    main(["greedy", "--config", str(one_dof_cfg), "--out", str(out)])
    main(["sweep", "--config", str(one_dof_cfg), "--out", str(out),
          "--basis", str(out / "basis_algorithm2.txt")])
    footer = comments(out / "sweep.csv")
    keys = {line.split("=")[0].strip("# ") for line in footer if "=" in line}
    assert {"basis_load_seconds", "rom_sweep_seconds", "rom_per_point_seconds",
            "fom_per_point_seconds", "speedup"} <= keys


def test_sweep_converged_basis_certifies_band(chain8_cfg, tmp_path):
    out = tmp_path / "out"
    assert main(["greedy", "--config", str(chain8_cfg), "--out", str(out)]) == EXIT_OK
    rc = main(["sweep", "--config", str(chain8_cfg), "--out", str(out),
               "--basis", str(out / "basis_algorithm2.txt")])
    assert rc == EXIT_OK
    cols = read_csv_columns(out / "sweep.csv")
    assert list(cols) == ["omega", "re_y", "im_y", "residual_dual_norm", "state_estimate"]
    assert len(cols["omega"]) == 201

    # spot-check: solutions at random grid frequencies carry no new information
    model = build_model(parse_config(chain8_cfg))
    space = import_basis(out / "basis_algorithm2.txt", model)
    grid = model.band.grid()
    rng = np.random.default_rng(11)
    for w in rng.choice(grid, size=20, replace=False):
        lam = model.band  # keep away from the two in-band resonances
        if min(abs(w - 0.6840402866513374), abs(w - 1.0)) < 2 * model.band.step:
            continue
        assert new_information_norm(space, solve_fom(model, float(w))) < 10 * 2e-7


def test_sweep_missing_basis_exits_config(chain8_cfg, tmp_path, capsys):
    rc = main(["sweep", "--config", str(chain8_cfg), "--out", str(tmp_path),
               "--basis", str(tmp_path / "nope.txt")])
    assert rc == EXIT_CONFIG
    assert "cannot read basis" in capsys.readouterr().err


def test_sweep_wrong_model_dimension_exits_config(chain8_cfg, tmp_path, capsys):
    out = tmp_path / "out"
    main(["greedy", "--config", str(chain8_cfg), "--out", str(out)])
    cavity_cfg = tmp_path / "cavity.cfg"
    cavity_cfg.write_text(
        "model.kind = cavity\nmodel.dim = 1\nmodel.elements = 40\nmodel.port = 13\n"
        "band.omega_min = 2.5\nband.omega_max = 7.0\nband.grid_size = 51\n"
    )
    rc = main(["sweep", "--config", str(cavity_cfg), "--out", str(out),
               "--basis", str(out / "basis_algorithm2.txt")])
    assert rc == EXIT_CONFIG
    assert "model has 39 unknowns" in capsys.readouterr().err


# ---------------------------------------------------------------- compare


def test_compare_single_strategy_exits_config(chain8_cfg, tmp_path, capsys):
    rc = main(["compare", "--config", str(chain8_cfg), "--out", str(tmp_path),
               "--strategy", "algorithm2"])
    assert rc == EXIT_CONFIG
    assert "at least two strategies" in capsys.readouterr().err


def test_compare_ranks_strategies_on_default_chain(tmp_path):
    out = tmp_path / "out"
    rc = main(["compare", "--out", str(out)])
    assert rc == EXIT_OK
    summaries = {}
    for line in comments(out / "compare.csv"):
        if "summary strategy=" in line:
            fields = dict(kv.split("=") for kv in line.lstrip("# ").split()[1:])
            summaries[fields["strategy"]] = fields
    assert set(summaries) == {"algorithm1", "algorithm2", "residual_baseline"}
    assert all(s["converged"] == "True" for s in summaries.values())
    # the residual selector stops with a worse space than the state selector
    a2 = float(summaries["algorithm2"]["final_eps_true"])
    bl = float(summaries["residual_baseline"]["final_eps_true"])
    assert bl > a2
    # the split-space run stores roughly twice the residual vectors
    cols = read_csv_columns(out / "compare.csv")
    last_mr = {}
    for strategy, mr in zip(cols["strategy"], cols["m_residual"]):
        if mr:
            last_mr[strategy] = int(mr)
    assert last_mr["algorithm1"] >= 1.5 * last_mr["algorithm2"]
    for s in ("algorithm1", "algorithm2", "residual_baseline"):
        assert (out / f"trace_{s}.csv").exists()


def test_compare_reruns_byte_identical(chain8_cfg, tmp_path):
    outs = [tmp_path / "a", tmp_path / "b"]
    for out in outs:
        rc = main(["compare", "--config", str(chain8_cfg), "--out", str(out),
                   "--seed", "0"])
        assert rc == EXIT_OK
    names = ["compare.csv", "trace_algorithm1.csv", "trace_algorithm2.csv",
             "trace_residual_baseline.csv"]
    for name in names:
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()


# ---------------------------------------------------------------- oracle


def test_oracle_writes_resonance_table_and_modal_sweep(chain8_cfg, tmp_path):
    out = tmp_path / "out"
    rc = main(["oracle", "--config", str(chain8_cfg), "--out", str(out)])
    assert rc == EXIT_OK

    model = build_model(parse_config(chain8_cfg))
    decomp = modal_decomposition(model)
    cols = read_csv_columns(out / "spectral.csv")
    assert f"# in_band_modes={decomp.count}" in comments(out / "spectral.csv")
    got = np.array([float(v) for v in cols["omega_n"]])
    assert np.allclose(got, decomp.omegas, rtol=1e-12)

    sweep = read_csv_columns(out / "modal_sweep.csv")
    assert len(sweep["omega"]) == 201
    i = 37  # arbitrary grid row, away from both resonances
    w = float(sweep["omega"][i])
    y = np.vdot(model.b, modal_solve(model, w))
    assert abs(complex(float(sweep["re_y"][i]), float(sweep["im_y"][i])) - y) < 1e-12
