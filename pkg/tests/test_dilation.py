"""Dilation construction and its defining residuals on small observables."""

import numpy as np
import pytest

from timepovm.dilation import (
    build_dilation,
    check_compression,
    check_imprimitivity,
    check_occurrence_consistency,
    check_restriction,
    shift_power_deviation,
)
from timepovm.model import (
    CovariantPOVM,
    EnergyGrid,
    build_halfline_povm,
    build_sharp_time_povm,
    random_smooth_state,
    vector_generated_povm,
)

from conftest import selfdual_grid


@pytest.fixture(scope="module")
def small_dilations():
    rng = np.random.default_rng(7)
    sharp = build_sharp_time_povm(selfdual_grid(12))
    de = 0.4
    half = build_halfline_povm(EnergyGrid(24, de, offset=-de * 12), 12)
    gen = np.exp(2j * np.pi * rng.random(12)) / np.sqrt(12.0)
    vector = vector_generated_povm(selfdual_grid(12), gen)
    return {p.label: build_dilation(p) for p in (sharp, half, vector)}


def test_embedding_is_isometry(small_dilations):
    for name, d in small_dilations.items():
        gram = d.embedding.conj().T @ d.embedding
        assert np.max(np.abs(gram - np.eye(d.povm.dim))) <= 1e-12, name


def test_projection_is_hermitian_idempotent(small_dilations):
    for name, d in small_dilations.items():
        p = d.projection
        assert np.max(np.abs(p - p.conj().T)) <= 1e-12, name
        assert np.max(np.abs(p @ p - p)) <= 1e-12, name


def test_sharp_measure_is_projection_valued_and_complete(small_dilations):
    for name, d in small_dilations.items():
        total = np.zeros(d.rank)
        for k in range(d.povm.n_bins):
            ind = d.sharp_indicator(k)
            assert set(np.unique(ind)) <= {0.0, 1.0}, name
            total += ind
        assert np.array_equal(total, np.ones(d.rank)), name


def test_compression_reproduces_effects(small_dilations):
    for name, d in small_dilations.items():
        assert check_compression(d, count=60, seed=3) <= 1e-12, name
        explicit = [np.array([0]), np.arange(d.povm.n_bins)]
        assert check_compression(d, bin_sets=explicit) <= 1e-12, name


def test_shift_is_unitary_and_imprimitive(small_dilations):
    for name, d in small_dilations.items():
        s = d.shift
        assert np.max(np.abs(s.conj().T @ s - np.eye(d.rank))) <= 1e-12, name
        assert check_imprimitivity(d) <= 1e-12, name


def test_shift_restricts_to_model_evolution(small_dilations):
    for name, d in small_dilations.items():
        assert check_restriction(d) <= 1e-12, name


def test_occurrence_statistics_survive_dilation(small_dilations):
    for name, d in small_dilations.items():
        states = [random_smooth_state(d.povm.grid, s) for s in range(4)]
        assert check_occurrence_consistency(d, states) <= 1e-12, name


def test_full_period_shift_is_global_phase(small_dilations):
    for name, d in small_dilations.items():
        assert shift_power_deviation(d) <= 1e-12, name


def test_shift_power_handles_offset_phase():
    # non-integer offset in units of the spacing: the period power of the
    # shift is a non-trivial global phase and must still be recognized
    g = EnergyGrid(10, 0.31, offset=0.1 - 5 * 0.31)
    d = build_dilation(build_sharp_time_povm(g))
    assert shift_power_deviation(d) <= 1e-12


def test_rank_bookkeeping(small_dilations):
    for name, d in small_dilations.items():
        n, dim = d.povm.n_bins, d.povm.dim
        assert d.rank == sum(s.stop - s.start for s in d.bin_slices)
        assert d.rank + d.discarded_count == n * dim, name
        assert d.embedding.shape == (d.rank, dim)
        # rank-one effect families dilate into one dimension per bin
        assert d.rank == n, name


def test_build_dilation_rejects_invalid_family():
    sharp = build_sharp_time_povm(selfdual_grid(8))
    dense = np.stack([sharp.effect(k) for k in range(8)])
    dense[1] *= 0.8
    broken = CovariantPOVM(sharp.grid, sharp.lattice, dense=dense)
    with pytest.raises(ValueError) as err:
        build_dilation(broken)
    assert "completeness" in str(err.value)


def test_dense_storage_dilates_identically():
    sharp = build_sharp_time_povm(selfdual_grid(8))
    dense = np.stack([sharp.effect(k) for k in range(8)])
    via_dense = build_dilation(CovariantPOVM(sharp.grid, sharp.lattice, dense=dense))
    assert check_compression(via_dense, count=30, seed=1) <= 1e-11
    assert check_imprimitivity(via_dense) <= 1e-11
    assert check_restriction(via_dense) <= 1e-11


def test_embed_maps_states_isometrically(small_dilations):
    for name, d in small_dilations.items():
        state = random_smooth_state(d.povm.grid, 11)
        lifted = d.embed(state)
        assert abs(np.linalg.norm(lifted) - 1.0) <= 1e-12, name
        back = d.embedding.conj().T @ lifted
        assert np.max(np.abs(back - state.amplitudes)) <= 1e-12, name
