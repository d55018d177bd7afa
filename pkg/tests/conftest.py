import numpy as np
import pytest

from fxhhw.grids import AxisSpec, build_grid
from fxhhw.model import ModelParams, OptionSpec, correlation_matrix

STRIKE = 100.0


def benchmark_correlations():
    return correlation_matrix(-0.4, -0.15, -0.15, 0.3, 0.3, 0.25)


def experiment1_model():
    """Constant mean-reversion levels; used by the call/put experiments."""
    return ModelParams(
        s0=STRIKE, v0=0.04, rd0=0.1, rf0=0.1,
        kappa=0.5, vbar=0.1, gamma=0.3,
        lambda_d=0.01, lambda_f=0.05, eta_d=0.007, eta_f=0.012,
        theta_d_params=(0.05, 0.0, 0.0), theta_f_params=(0.05, 0.0, 0.0),
        correlation=benchmark_correlations(),
    )


def experiment3_model():
    """Time-dependent mean-reversion levels."""
    return ModelParams(
        s0=STRIKE, v0=0.04, rd0=0.1, rf0=0.1,
        kappa=0.5, vbar=0.1, gamma=0.3,
        lambda_d=0.01, lambda_f=0.05, eta_d=0.007, eta_f=0.012,
        theta_d_params=(0.074, 0.014, 2.10), theta_f_params=(1.0, 0.5, 0.5),
        correlation=benchmark_correlations(),
    )


def experiment_grid(m, strike=STRIKE, v0=0.04, r0=0.1):
    """The sinh-stretched box used throughout the experiments."""
    m1, m2, m3, m4 = m
    return build_grid(
        AxisSpec(m1, 0.0, 14.0 * strike, strike, 0.1),
        AxisSpec(m2, 0.0, 10.0, v0, 50.0),
        AxisSpec(m3, -1.0, 1.0, r0, 500.0),
        AxisSpec(m4, -1.0, 1.0, r0, 500.0),
    )


@pytest.fixture
def par1():
    return experiment1_model()


@pytest.fixture
def par3():
    return experiment3_model()


@pytest.fixture
def call_1y():
    return OptionSpec(kind="call", strike=STRIKE, maturity=1.0)


@pytest.fixture
def put_2y():
    return OptionSpec(kind="put", strike=STRIKE, maturity=2.0)


@pytest.fixture
def coarse_grid():
    return experiment_grid((10, 8, 6, 6))


@pytest.fixture
def rng():
    return np.random.default_rng(42)
