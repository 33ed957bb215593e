import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nfbeam.arrays import (
    ArrayConfig,
    SourceLocation,
    classify_region,
    field_boundaries,
    frft_basis,
    range_of,
    steering_exact,
    steering_fresnel,
    surrogate_coords,
)

CFG512 = ArrayConfig(512)


def test_default_spacing_is_half_wavelength():
    cfg = ArrayConfig(64, wavelength=0.02)
    assert cfg.spacing == 0.01
    assert ArrayConfig(64, spacing=0.003).spacing == 0.003


def test_offsets_centered():
    cfg = ArrayConfig(8)
    assert np.allclose(cfg.offsets, np.arange(8) - 3.5)
    assert cfg.offsets.sum() == 0
    odd = ArrayConfig(7)
    assert odd.offsets[3] == 0


def test_aperture():
    assert CFG512.aperture == pytest.approx(511 * 0.005)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"num_antennas": 0},
        {"num_antennas": -3},
        {"num_antennas": 8, "wavelength": 0.0},
        {"num_antennas": 8, "spacing": -0.01},
    ],
)
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        ArrayConfig(**kwargs)


@pytest.mark.parametrize("r,theta", [(0.0, 0.2), (-5.0, 0.2), (10.0, 1.0), (10.0, -1.5)])
def test_location_validation(r, theta):
    with pytest.raises(ValueError):
        SourceLocation(r, theta)


def test_far_field_location_allowed():
    loc = SourceLocation(math.inf, 0.3)
    assert surrogate_coords(CFG512, loc) == (0.3, 0.0)


def test_field_boundaries_512():
    b = field_boundaries(CFG512)
    assert b.fresnel == pytest.approx(25.3208, abs=1e-3)
    assert b.rayleigh == pytest.approx(1305.605, abs=1e-2)
    assert b.fresnel < b.rayleigh


def test_field_boundaries_degenerate():
    with pytest.raises(ValueError):
        field_boundaries(ArrayConfig(1))


def test_classify_region_edges():
    b = field_boundaries(CFG512)
    assert classify_region(CFG512, b.rayleigh) == "far"
    assert classify_region(CFG512, b.rayleigh * 0.999) == "radiating-near"
    assert classify_region(CFG512, b.fresnel) == "radiating-near"
    assert classify_region(CFG512, b.fresnel * 0.999) == "reactive-near"


def test_steering_single_element():
    cfg = ArrayConfig(1)
    v = steering_exact(cfg, SourceLocation(5.0, 0.4))
    assert v.elements.shape == (1,)
    assert v.elements[0] == pytest.approx(1.0)


def test_steering_exact_rejects_infinite_range():
    with pytest.raises(ValueError):
        steering_exact(CFG512, SourceLocation(math.inf, 0.1))


def test_steering_kinds():
    loc = SourceLocation(40.0, 0.1)
    assert steering_exact(CFG512, loc).kind == "exact"
    assert steering_fresnel(CFG512, loc).kind == "fresnel"
    assert frft_basis(CFG512, 0.1, 1e-5).kind == "basis"


@settings(deadline=None, max_examples=40)
@given(
    n=st.integers(2, 300),
    theta=st.floats(-0.99, 0.99),
    r=st.floats(1.0, 1e6),
)
def test_steering_unit_norm(n, theta, r):
    cfg = ArrayConfig(n)
    loc = SourceLocation(r, theta)
    for v in (steering_exact(cfg, loc), steering_fresnel(cfg, loc)):
        assert np.linalg.norm(v.elements) == pytest.approx(1.0, abs=1e-12)
        assert np.allclose(np.abs(v.elements), 1 / math.sqrt(n), atol=1e-12)


def test_steering_exact_matches_longdouble_reference():
    # the cancellation-free path against brute-force extended precision
    cfg = ArrayConfig(256)
    loc = SourceLocation(1000.0, 0.4)
    u = (cfg.offsets * cfg.spacing).astype(np.longdouble)
    r = np.longdouble(loc.range_m)
    r_m = np.sqrt(r * r - 2 * r * u * np.longdouble(loc.theta) + u * u)
    phase = np.asarray(
        -2 * np.pi / np.longdouble(cfg.wavelength) * (r_m - r), dtype=float
    )
    ref = np.exp(1j * phase) / math.sqrt(256)
    got = steering_exact(cfg, loc).elements
    assert np.abs(got - ref).max() < 1e-9


def test_fresnel_matches_exact_in_far_zone():
    # second-order phase error shrinks with range
    loc_far = SourceLocation(2000.0, 0.3)
    a = steering_exact(CFG512, loc_far).elements
    b = steering_fresnel(CFG512, loc_far).elements
    assert abs(np.vdot(a, b)) > 0.999


def test_fresnel_fidelity_monotone_in_range():
    b = field_boundaries(CFG512)
    rs = np.geomspace(b.fresnel, b.rayleigh, 8)
    fid = []
    for r in rs:
        loc = SourceLocation(float(r), 0.5)
        fid.append(
            abs(
                np.vdot(
                    steering_exact(CFG512, loc).elements,
                    steering_fresnel(CFG512, loc).elements,
                )
            )
        )
    assert all(b >= a - 1e-12 for a, b in zip(fid, fid[1:]))
    assert fid[0] >= 0.95


@settings(deadline=None, max_examples=50)
@given(theta=st.floats(-0.99, 0.99), r=st.floats(0.5, 1e5))
def test_surrogate_round_trip(theta, r):
    theta2, s_hat = surrogate_coords(CFG512, SourceLocation(r, theta))
    assert theta2 == theta
    assert s_hat >= 0
    assert range_of(CFG512, theta, s_hat) == pytest.approx(r, rel=1e-12)


def test_range_of_sentinels():
    assert range_of(CFG512, 0.2, 0.0) == math.inf
    with pytest.raises(ValueError):
        range_of(CFG512, 0.2, -1e-9)


def test_surrogate_monotone_in_inverse_range():
    _, s_near = surrogate_coords(CFG512, SourceLocation(10.0, 0.1))
    _, s_far = surrogate_coords(CFG512, SourceLocation(100.0, 0.1))
    assert s_near > s_far > 0


def test_frft_basis_validation():
    with pytest.raises(ValueError):
        frft_basis(CFG512, 1.5, 0.0)
    with pytest.raises(ValueError):
        frft_basis(CFG512, 0.0, -1e-6)


def test_frft_basis_far_field_is_dft_column():
    # s_hat = 0 reduces to a centered DFT column
    cfg = ArrayConfig(16)
    k = 5
    theta_hat = -1 + 2 * k / 16
    v = frft_basis(cfg, theta_hat, 0.0).elements
    m = np.arange(16)
    dft = np.exp(1j * np.pi * theta_hat * (m - 7.5)) / 4
    assert np.abs(v - dft).max() < 1e-12


def test_basis_equals_fresnel_at_same_coords():
    loc = SourceLocation(60.0, -0.25)
    theta, s_hat = surrogate_coords(CFG512, loc)
    a = steering_fresnel(CFG512, loc).elements
    b = frft_basis(CFG512, theta, s_hat).elements
    assert np.abs(a - b).max() < 1e-15
