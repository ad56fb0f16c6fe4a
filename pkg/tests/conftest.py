import os
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from secrecy_sdp import ChannelInstance, make_rng, sample_channel

settings.register_profile(
    "default",
    max_examples=25,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.register_profile("thorough", max_examples=200, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

ROOT = Path(__file__).resolve().parents[1]
FIXTURES = ROOT / "fixtures"
CONFIGS = ROOT / "configs"


@pytest.fixture
def fixtures_dir():
    return FIXTURES


@pytest.fixture
def orthogonal():
    return ChannelInstance([1.0, 0.0], [[[0.0], [1.0]]], 1.0)


@pytest.fixture
def dominated():
    return ChannelInstance([1.0, 0.0], [[[2.0], [0.0]]], 1.0)


def random_instance(seed, n_t=4, eve_dims=(2, 2), power=2.0, rho_e_sq=1.0):
    return sample_channel(make_rng(seed), n_t, eve_dims, rho_e_sq=rho_e_sq, power=power)


def random_hermitian(rng, n):
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return 0.5 * (A + A.conj().T)


def random_psd(rng, n, rank=None):
    rank = n if rank is None else rank
    X = rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))
    return X @ X.conj().T


# PASS/FAIL lines written by test_acceptance.py, repeated at the end of the
# run so they are visible without -s
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
