import numpy as np
import pytest

from qpdyn.ingest import EmbeddedSeries, delay_embed, standardize
from qpdyn.kernel import (
    bistochastic_normalize,
    gaussian_kernel_matrix,
    kernel_eigenbasis,
    median_squared_distance,
)


def random_embedding(n=120, dim=3, seed=0, dt=1.0):
    """Generic point cloud wrapped as delay states (Q=0, k=dim)."""
    rng = np.random.default_rng(seed)
    states = rng.normal(size=(n, dim))
    return EmbeddedSeries(states=states, Q=0, dt=dt, k=dim)


def basis_for(emb, L=20, eps_scale=1.0, tau=0.0, storage="dense"):
    eps = eps_scale * median_squared_distance(emb.states)
    km = gaussian_kernel_matrix(emb, epsilon=eps, tau=tau, storage=storage)
    return kernel_eigenbasis(bistochastic_normalize(km), L)


@pytest.fixture(scope="session")
def small_emb():
    return random_embedding()


@pytest.fixture(scope="session")
def small_basis(small_emb):
    return basis_for(small_emb, L=20)


TORUS_BINS = (13, 21)
TORUS_GRID = 512
TORUS_Q = 8


@pytest.fixture(scope="session")
def torus_series():
    """2-torus rotation observable with mild contraction chaos.

    Generated with TORUS_Q extra samples so that after embedding with
    TORUS_Q delays the state count is exactly TORUS_GRID and the
    generators sit on DFT bins TORUS_BINS.
    """
    from qpdyn.synth import SynthSpec, generate, on_grid_rho

    spec = SynthSpec(
        rho=on_grid_rho(TORUS_BINS, TORUS_GRID),
        gper_coeffs={(1, 0): 1.0, (0, 1): 0.8, (1, 1): 0.4},
        chaos={"family": "tanh", "a": 0.4, "b": 1.0},
        N=TORUS_GRID + TORUS_Q,
        k=1,
        seed=3,
        burn_in=128,
    )
    return generate(spec)


@pytest.fixture(scope="session")
def torus_basis(torus_series):
    ts, _ = torus_series
    ts_std, _ = standardize(ts)
    emb = delay_embed(ts_std, TORUS_Q)
    eps = 0.02 * median_squared_distance(emb.states)
    km = gaussian_kernel_matrix(emb, epsilon=eps)
    return kernel_eigenbasis(bistochastic_normalize(km), 80)


@pytest.fixture(scope="session")
def torus_model(torus_series):
    """Full analyzed model of the torus system (shared, do not mutate)."""
    from qpdyn.pipeline import AnalyzeParams, analyze

    ts, _ = torus_series
    ts_std, _ = standardize(ts)
    emb = delay_embed(ts_std, TORUS_Q)
    eps = 0.02 * median_squared_distance(emb.states)
    params = AnalyzeParams(Q=TORUS_Q, epsilon=eps, L=80, eps1=2.0, eps2=2.0, L0=30)
    return analyze(ts, params)
