"""Uniform linear array geometry, field regions, and steering vectors.

The array is a centered ULA on the z axis: element m in 0..N-1 sits at
offset delta_m = m - (N-1)/2 in units of the spacing d.  All vectors are
phase-only with per-element modulus 1/sqrt(N); amplitude (path-loss)
variation across the aperture is deliberately not modeled.
"""

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ArrayConfig",
    "SourceLocation",
    "SteeringVector",
    "FieldBoundaries",
    "field_boundaries",
    "classify_region",
    "steering_exact",
    "steering_fresnel",
    "frft_basis",
    "surrogate_coords",
    "range_of",
]


@dataclass(frozen=True)
class ArrayConfig:
    """Centered uniform linear array and carrier wavelength.

    Parameters
    ----------
    num_antennas : int
        Element count N >= 1.
    wavelength : float
        Carrier wavelength in meters (default 0.01, i.e. 30 GHz class).
    spacing : float or None
        Element spacing in meters; None selects half-wavelength.
    """

    num_antennas: int
    wavelength: float = 0.01
    spacing: float = None

    def __post_init__(self):
        if self.num_antennas < 1:
            raise ValueError("num_antennas must be a positive integer")
        if self.wavelength <= 0:
            raise ValueError("wavelength must be positive")
        if self.spacing is None:
            object.__setattr__(self, "spacing", self.wavelength / 2)
        elif self.spacing <= 0:
            raise ValueError("spacing must be positive")

    @property
    def offsets(self) -> np.ndarray:
        """Centered element indices delta_m = m - (N-1)/2; symmetric, sum 0."""
        n = self.num_antennas
        return np.arange(n) - (n - 1) / 2

    @property
    def aperture(self) -> float:
        """Physical aperture D = (N-1) d in meters."""
        return (self.num_antennas - 1) * self.spacing


@dataclass(frozen=True)
class SourceLocation:
    """Point source at range r (meters from the array center) and angle theta.

    theta is the sine of the azimuth from broadside, so theta in (-1, 1).
    math.inf is a valid range and denotes a far-field source.
    """

    range_m: float
    theta: float

    def __post_init__(self):
        if not self.range_m > 0:
            raise ValueError("range must be positive")
        if not abs(self.theta) < 1:
            raise ValueError("theta must lie in (-1, 1)")


@dataclass(frozen=True)
class SteeringVector:
    """Unit-norm complex array response; kind tags how it was generated."""

    elements: np.ndarray
    kind: str

    def __len__(self):
        return len(self.elements)


@dataclass(frozen=True)
class FieldBoundaries:
    """Inner (fresnel) and outer (rayleigh) radii of the radiating near field."""

    fresnel: float
    rayleigh: float


def field_boundaries(cfg: ArrayConfig) -> FieldBoundaries:
    """Classic field-region boundaries of the aperture.

    rayleigh = 2 D^2 / lambda, fresnel = 0.62 sqrt(D^3 / lambda).
    Raises for N < 2 where the aperture is degenerate.
    """
    if cfg.num_antennas < 2:
        raise ValueError("degenerate aperture: need at least 2 antennas")
    d_ap = cfg.aperture
    lam = cfg.wavelength
    return FieldBoundaries(
        fresnel=0.62 * math.sqrt(d_ap**3 / lam),
        rayleigh=2 * d_ap**2 / lam,
    )


def classify_region(cfg: ArrayConfig, r: float) -> str:
    """Classify a range as 'reactive-near', 'radiating-near', or 'far'."""
    if not r > 0:
        raise ValueError("range must be positive")
    b = field_boundaries(cfg)
    if r >= b.rayleigh:
        return "far"
    if r < b.fresnel:
        return "reactive-near"
    return "radiating-near"


def _check_location(loc: SourceLocation):
    # dataclass validation already covers construction; guard raw tuples too
    if not loc.range_m > 0 or not abs(loc.theta) < 1:
        raise ValueError("invalid source location")


def steering_exact(cfg: ArrayConfig, loc: SourceLocation) -> SteeringVector:
    """Spherical-wave steering vector from exact per-element distances.

    Element m carries exp(-j 2 pi (r_m - r) / lambda) / sqrt(N) with
    r_m = sqrt(r^2 - 2 r delta_m d theta + (delta_m d)^2).  The difference
    r_m - r is evaluated in the cancellation-free form
    (delta d)(delta d - 2 r theta) / (r_m + r), which stays accurate out to
    planar-limit ranges where r_m - r is billions of ulps below r.

    Requires a finite range; use steering_fresnel / frft_basis with s_hat = 0
    for ideal far-field vectors.
    """
    _check_location(loc)
    if not math.isfinite(loc.range_m):
        raise ValueError("exact model needs a finite range")
    r = loc.range_m
    u = cfg.offsets * cfg.spacing
    r_m = np.sqrt(r * r - 2 * r * u * loc.theta + u * u)
    path = u * (u - 2 * r * loc.theta) / (r_m + r)
    n = cfg.num_antennas
    return SteeringVector(
        np.exp(-2j * np.pi / cfg.wavelength * path) / math.sqrt(n), "exact"
    )


def _quadratic_phase(cfg: ArrayConfig, theta: float, s_hat: float) -> np.ndarray:
    """Shared chirp kernel exp(j pi (g theta delta - s_hat delta^2)) / sqrt(N)."""
    g = 2 * cfg.spacing / cfg.wavelength
    delta = cfg.offsets
    n = cfg.num_antennas
    return np.exp(1j * np.pi * (g * theta * delta - s_hat * delta**2)) / math.sqrt(n)


def steering_fresnel(cfg: ArrayConfig, loc: SourceLocation) -> SteeringVector:
    """Fresnel (second-order) approximation of the exact steering vector.

    The phase is linear-plus-quadratic in the element offset: element m is
    exp(j pi (g theta delta_m - s_hat delta_m^2)) / sqrt(N) with g = 2d/lambda
    and surrogate distance s_hat from surrogate_coords.  At d = lambda/2 the
    linear term is the classic pi delta_m theta.
    """
    _check_location(loc)
    theta, s_hat = surrogate_coords(cfg, loc)
    return SteeringVector(_quadratic_phase(cfg, theta, s_hat), "fresnel")


def frft_basis(cfg: ArrayConfig, theta_hat: float, s_hat: float) -> SteeringVector:
    """Quadratic-phase (chirp) basis vector of the beamspace transform.

    Identical functional form to steering_fresnel but parameterized directly
    by beamspace coordinates; s_hat = 0 reduces to a far-field DFT column.
    """
    if not abs(theta_hat) <= 1:
        raise ValueError("theta_hat must lie in [-1, 1]")
    if s_hat < 0:
        raise ValueError("s_hat must be non-negative")
    return SteeringVector(_quadratic_phase(cfg, theta_hat, s_hat), "basis")


def surrogate_coords(cfg: ArrayConfig, loc: SourceLocation) -> tuple:
    """Map a physical location to beamspace coordinates (theta, s_hat).

    s_hat = (2 d^2 / lambda)(1 - theta^2) / (2 r); monotone in 1/r at fixed
    angle, and 0 exactly in the far-field limit r = inf.
    """
    _check_location(loc)
    d = cfg.spacing
    if math.isinf(loc.range_m):
        return loc.theta, 0.0
    s_hat = d * d * (1 - loc.theta**2) / (cfg.wavelength * loc.range_m)
    return loc.theta, s_hat


def range_of(cfg: ArrayConfig, theta: float, s_hat: float) -> float:
    """Invert surrogate_coords: the range that produces s_hat at angle theta.

    s_hat = 0 returns math.inf (far-field sentinel).  Negative s_hat has no
    physical preimage and raises.
    """
    if s_hat < 0:
        raise ValueError("s_hat must be non-negative")
    if s_hat == 0:
        return math.inf
    d = cfg.spacing
    return d * d * (1 - theta**2) / (cfg.wavelength * s_hat)
