"""Shared fixture: real CSV artifacts produced by the solver CLI.

The plot scripts only ever see delimited files, so the fixtures come from the
installed command line tool run in a subprocess, not from importing it.
"""

import subprocess
import sys

import pytest

CONFIG = """
model.kind = chain
model.n = 8
band.omega_min = 0.6
band.omega_max = 1.1
band.grid_size = 201
"""


def run_cli(args):
    proc = subprocess.run(
        [sys.executable, "-m", "rbsweep.cli", *args],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    return proc


@pytest.fixture(scope="session")
def artifacts(tmp_path_factory):
    d = tmp_path_factory.mktemp("artifacts")
    cfg = d / "chain8.cfg"
    cfg.write_text(CONFIG)
    run_cli(["greedy", "--config", str(cfg), "--out", str(d), "--oracle"])
    run_cli(["compare", "--config", str(cfg), "--out", str(d), "--seed", "0"])
    run_cli(["sweep", "--config", str(cfg), "--out", str(d),
             "--basis", str(d / "basis_algorithm2.txt")])
    return d
