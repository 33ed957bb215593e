import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nfbeam.arrays import ArrayConfig, SourceLocation, frft_basis, steering_fresnel
from nfbeam.beamspace import (
    BeamspaceGrid,
    BeamspaceMap,
    beamspace_direct,
    beamspace_fast,
    default_grid,
    synthesize,
    uniform_angles,
)


def random_unit(n, seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return x / np.linalg.norm(x)


def test_uniform_angles():
    a = uniform_angles(512)
    assert a[0] == -1.0
    assert len(a) == 512
    assert np.allclose(np.diff(a), 2 / 512)
    assert a[-1] == pytest.approx(1 - 2 / 512)


def test_default_grid_shape():
    cfg = ArrayConfig(512)
    grid = default_grid(cfg)
    assert grid.num_angles == 512
    assert grid.num_surrogates == 11
    assert grid.surrogates[0] == 0.0
    assert grid.surrogates[-1] == pytest.approx(176 / 512**2)
    assert np.all(np.diff(grid.surrogates) > 0)


def test_grid_validation():
    with pytest.raises(ValueError):
        BeamspaceGrid(uniform_angles(8), np.array([-1e-6, 0.0]))
    with pytest.raises(ValueError):
        BeamspaceGrid(uniform_angles(8), np.array([0.0, 2e-5, 1e-5]))


def test_fast_requires_enough_angles():
    cfg = ArrayConfig(64)
    grid = default_grid(cfg, num_angles=32)
    with pytest.raises(ValueError):
        beamspace_fast(random_unit(64, 0), grid, cfg)


@settings(deadline=None, max_examples=25)
@given(
    n=st.integers(4, 64),
    double=st.booleans(),
    seed=st.integers(0, 2**32 - 1),
)
def test_fast_matches_direct(n, double, seed):
    cfg = ArrayConfig(n)
    grid = default_grid(cfg, num_angles=2 * n if double else n, num_surrogates=5)
    x = random_unit(n, seed)
    a = beamspace_direct(x, grid, cfg).coefficients
    b = beamspace_fast(x, grid, cfg).coefficients
    assert np.abs(a - b).max() < 1e-9


def test_fast_matches_direct_off_half_wavelength():
    # g != 1 exercises the chirp-z branch
    cfg = ArrayConfig(32, wavelength=0.01, spacing=0.0037)
    grid = default_grid(cfg, num_angles=64, num_surrogates=5)
    x = random_unit(32, 3)
    a = beamspace_direct(x, grid, cfg).coefficients
    b = beamspace_fast(x, grid, cfg).coefficients
    assert np.abs(a - b).max() < 1e-9


@settings(deadline=None, max_examples=20)
@given(n=st.integers(4, 64), double=st.booleans(), seed=st.integers(0, 2**32 - 1))
def test_row_energy(n, double, seed):
    cfg = ArrayConfig(n)
    grid = default_grid(cfg, num_angles=2 * n if double else n)
    x = random_unit(n, seed)
    bmap = beamspace_fast(x, grid, cfg)
    energy = (np.abs(bmap.coefficients) ** 2).sum(axis=1)
    assert np.allclose(energy, grid.num_angles / n, rtol=1e-9)


def test_on_lattice_peak_gain_is_one():
    cfg = ArrayConfig(128)
    grid = default_grid(cfg, num_angles=256)
    k, l = 77, 4
    x = frft_basis(cfg, float(grid.angles[k]), float(grid.surrogates[l]))
    bmap = beamspace_fast(x, grid, cfg)
    assert bmap.peak_cell() == (l, k)
    assert bmap.gains[l, k] == pytest.approx(1.0, abs=1e-12)


def test_translation_invariance():
    cfg = ArrayConfig(128)
    grid = default_grid(cfg, num_angles=256)
    dk, dl = 30, 2
    k, l = 100, 3
    x1 = frft_basis(cfg, float(grid.angles[k]), float(grid.surrogates[l]))
    x2 = frft_basis(cfg, float(grid.angles[k + dk]), float(grid.surrogates[l + dl]))
    g1 = beamspace_fast(x1, grid, cfg).gains
    g2 = beamspace_fast(x2, grid, cfg).gains
    s = grid.num_surrogates
    a = grid.num_angles
    # overlap region shifted by (dl, dk)
    assert np.abs(g1[: s - dl, : a - dk] - g2[dl:, dk:]).max() < 1e-9


def test_far_field_row_is_zero_padded_dft():
    cfg = ArrayConfig(64)
    grid = default_grid(cfg, num_angles=128)
    x = random_unit(64, 9)
    bmap = beamspace_direct(x, grid, cfg)
    m = np.arange(64)
    ref = np.abs(np.fft.fft(x * np.exp(1j * np.pi * m), n=128)) / 8
    assert np.abs(bmap.gains[0] - ref).max() < 1e-9


def test_accepts_steering_vector_and_array():
    cfg = ArrayConfig(32)
    grid = default_grid(cfg, num_angles=32)
    v = steering_fresnel(cfg, SourceLocation(20.0, 0.1))
    a = beamspace_fast(v, grid, cfg).coefficients
    b = beamspace_fast(v.elements, grid, cfg).coefficients
    assert np.array_equal(a, b)


def test_wrong_length_input_rejected():
    cfg = ArrayConfig(32)
    grid = default_grid(cfg, num_angles=32)
    with pytest.raises(ValueError):
        beamspace_fast(np.ones(31, dtype=complex), grid, cfg)


def test_peak_cell_tie_breaks_to_first():
    grid = default_grid(ArrayConfig(8), num_angles=8, num_surrogates=2)
    coeffs = np.zeros((2, 8), dtype=complex)
    coeffs[0, 3] = 1.0
    coeffs[1, 2] = 1.0
    bmap = BeamspaceMap(grid, coeffs)
    assert bmap.peak_cell() == (0, 3)


def test_row_inverse_when_square():
    # at A = N each row of the transform is unitary up to the chirp
    cfg = ArrayConfig(64)
    grid = default_grid(cfg, num_angles=64)
    x = random_unit(64, 21)
    bmap = beamspace_direct(x, grid, cfg)
    l = 5
    cols = np.stack(
        [
            frft_basis(cfg, float(t), float(grid.surrogates[l])).elements
            for t in grid.angles
        ],
        axis=1,
    )
    x_rec = cols @ bmap.coefficients[l]
    assert np.abs(x_rec - x).max() < 1e-9


def test_synthesize_linearity_and_empty():
    cfg = ArrayConfig(32)
    assert np.array_equal(synthesize([], cfg), np.zeros(32, dtype=complex))
    c1 = [(0.25, 1e-5, 1.0 + 0.5j)]
    c2 = [(-0.5, 3e-5, -2.0j)]
    both = synthesize(c1 + c2, cfg)
    assert np.abs(both - synthesize(c1, cfg) - synthesize(c2, cfg)).max() < 1e-12


def test_synthesize_round_trip_peak():
    cfg = ArrayConfig(64)
    grid = default_grid(cfg, num_angles=128)
    k, l = 40, 2
    x = synthesize([(float(grid.angles[k]), float(grid.surrogates[l]), 2.0)], cfg)
    bmap = beamspace_fast(x, grid, cfg)
    assert bmap.peak_cell() == (l, k)
    assert bmap.gains[l, k] == pytest.approx(2.0, abs=1e-9)


def test_thread_env_override(monkeypatch):
    from nfbeam.beamspace import _fft_workers

    monkeypatch.delenv("NFB_THREADS", raising=False)
    assert _fft_workers() == -1
    monkeypatch.setenv("NFB_THREADS", "0")
    assert _fft_workers() == -1
    monkeypatch.setenv("NFB_THREADS", "3")
    assert _fft_workers() == 3
