"""Shared model fixtures and the acceptance-criteria reporter."""
from types import SimpleNamespace

import numpy as np
import pytest

from rbsweep import (
    FrequencyBand,
    compute_inband_modes,
    compute_statics,
    import_model,
    make_helmholtz_cavity,
    make_resonator_chain,
)
from rbsweep.fom import x_inner, x_norm
from rbsweep.reduction import compose_residual_space, from_vectors


@pytest.fixture(scope="session")
def one_dof(tmp_path_factory):
    """K=[4], M=[1], b=[1]: resonance at omega=2, every quantity hand-checkable."""
    d = tmp_path_factory.mktemp("one_dof")
    (d / "k.txt").write_text("1 1 1\n1 1 4.0\n")
    (d / "m.txt").write_text("1 1 1\n1 1 1.0\n")
    (d / "b.txt").write_text("1.0\n")
    return import_model(d / "k.txt", d / "m.txt", d / "b.txt", FrequencyBand(0.5, 1.5))


@pytest.fixture(scope="session")
def chain3():
    return make_resonator_chain(3, 1.0, FrequencyBand(0.6, 1.5))


@pytest.fixture(scope="session")
def chain8():
    # two in-band resonances: omega = 0.6840, 1.0
    return make_resonator_chain(8, 1.0, FrequencyBand(0.6, 1.1))


@pytest.fixture(scope="session")
def chain20():
    # the four-resonance comparison model; resonances 0.5895, 0.7307, 0.8678, 1.0
    return make_resonator_chain(20, 1.0, FrequencyBand(0.55, 1.03, 1001))


@pytest.fixture(scope="session")
def chain50():
    return make_resonator_chain(50, 1.0, FrequencyBand(0.5, 1.0))


@pytest.fixture(scope="session")
def cavity1d():
    return make_helmholtz_cavity(1, 40, FrequencyBand(2.5, 7.0), port_node=13)


@pytest.fixture(scope="session")
def cavity2d():
    return make_helmholtz_cavity(2, 8, FrequencyBand(4.5, 8.0), port_node=24)


@pytest.fixture(scope="session")
def bundled_models(chain3, chain8, chain20, chain50, cavity1d, cavity2d):
    """Every generated model small enough for dense oracle sweeps."""
    return [
        ("chain3", chain3),
        ("chain8", chain8),
        ("chain20", chain20),
        ("chain50", chain50),
        ("cavity1d", cavity1d),
        ("cavity2d", cavity2d),
    ]


@pytest.fixture(scope="session")
def pollution(chain20):
    """Chain with one in-band mode replaced by an inexactly computed copy.

    The contamination direction is X-orthogonal to all four exact modes and to
    the statics field, so the estimate space stays blind to it while the
    residual picks it up with full pole gain near the withheld resonance.
    """
    model = chain20
    band = model.band
    decomp = compute_inband_modes(model)
    f0 = compute_statics(model)
    rng = np.random.default_rng(7)
    noise = rng.standard_normal(model.n)
    for v in list(decomp.modes.T) + [f0]:
        noise = noise - (x_inner(model, noise, v) / x_inner(model, v, v)).real * v
    noise /= x_norm(model, noise)
    withheld = 2
    delta = 6e-4
    vecs = [
        decomp.modes[:, i] + delta * noise if i == withheld else decomp.modes[:, i]
        for i in range(decomp.count)
    ]
    primal = from_vectors(model, vecs)
    grid = band.grid()
    omega_w = decomp.omegas[withheld]
    return SimpleNamespace(
        model=model,
        grid=grid,
        primal=primal,
        residual_space=compose_residual_space(primal, [f0]),
        omega_withheld=omega_w,
        window=np.abs(grid - omega_w) <= 10 * band.step,
        step=band.step,
    )
