"""Shared fixtures: the observables and reference states reused across files.

Everything heavy is session-scoped so the expensive builds (dilations, the
reference minimal state, the default models) happen once per run.
"""

import numpy as np
import pytest

from timepovm.dilation import build_dilation
from timepovm.model import (
    EnergyGrid,
    build_halfline_povm,
    build_sharp_time_povm,
    default_fullline_model,
    default_halfline_model,
    vector_generated_povm,
)
from timepovm.variational import minimal_state


def selfdual_grid(n: int) -> EnergyGrid:
    de = float(np.sqrt(2.0 * np.pi / n))
    return EnergyGrid(n, de, offset=-de * (n // 2))


@pytest.fixture(scope="session")
def sharp16():
    return build_sharp_time_povm(selfdual_grid(16))


@pytest.fixture(scope="session")
def sharp64():
    return build_sharp_time_povm(selfdual_grid(64))


@pytest.fixture(scope="session")
def halfline64():
    de = 0.3
    return build_halfline_povm(EnergyGrid(64, de, offset=-de * 32), 32)


@pytest.fixture(scope="session")
def vector64():
    rng = np.random.default_rng(0)
    generator = np.exp(2j * np.pi * rng.random(64)) / np.sqrt(64.0)
    return vector_generated_povm(selfdual_grid(64), generator)


@pytest.fixture(scope="session")
def sharp64_dilation(sharp64):
    return build_dilation(sharp64)


@pytest.fixture(scope="session")
def halfline64_dilation(halfline64):
    return build_dilation(halfline64)


@pytest.fixture(scope="session")
def vector64_dilation(vector64):
    return build_dilation(vector64)


@pytest.fixture(scope="session")
def fullline_model():
    return default_fullline_model()


@pytest.fixture(scope="session")
def halfline_model():
    return default_halfline_model()


@pytest.fixture(scope="session")
def reference_minimal_state():
    # h=1e-3, L=20: the spacing and domain used by the certification
    return minimal_state(1e-3, 20.0)
