"""High/low mainlobe analytics of the beamspace pattern.

Everything here consumes only coordinate *differences* from the focused
center: the Fresnel-model gain surface is translation invariant, so widths,
fits, and plateau measurements are center-independent by construction.

Gain conventions: cross sections and plateau measurements use amplitude
gain (moduli, peak 1 at a perfect match); the Gaussian mainlobe model is
fitted on power gain, whose half-power region is the classic 3 dB mainlobe.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .arrays import ArrayConfig

__all__ = [
    "CrossSection",
    "MainlobeFit",
    "PspPrediction",
    "PspMeasurement",
    "pattern_gain",
    "cross_section",
    "width_3db",
    "predict_high_mainlobe_widths",
    "fit_log_gaussian",
    "gaussian_fit",
    "contour_ellipse",
    "psp_predict",
    "low_mainlobe_measure",
    "partition_energy",
]

HALF_AMP = 1 / math.sqrt(2)

# below ~20/N^2 the plateau merges with the high mainlobe and the
# stationary-phase picture stops applying
PSP_FLOOR = 20.0


def pattern_gain(cfg: ArrayConfig, d_theta, d_s) -> np.ndarray:
    """Amplitude gain of a focused beam at beamspace offset (d_theta, d_s).

    |<basis(theta0 + d_theta, s0 + d_s), basis(theta0, s0)>| depends only on
    the offsets; broadcasting follows numpy rules over the two offset arrays.
    """
    g = 2 * cfg.spacing / cfg.wavelength
    delta = cfg.offsets
    d_theta = np.asarray(d_theta, dtype=float)
    d_s = np.asarray(d_s, dtype=float)
    shape = np.broadcast_shapes(d_theta.shape, d_s.shape)
    dt = np.broadcast_to(d_theta, shape).ravel()
    ds = np.broadcast_to(d_s, shape).ravel()
    ph = np.pi * (g * np.outer(dt, delta) - np.outer(ds, delta**2))
    out = np.abs(np.exp(1j * ph).sum(axis=1)) / cfg.num_antennas
    return out.reshape(shape) if shape else float(out[0])


@dataclass(frozen=True, eq=False)
class CrossSection:
    """1-D gain profile through a focused center along one beamspace axis."""

    axis: str  # "angle" | "surrogate"
    fixed: float  # the held coordinate of the other axis
    coords: np.ndarray  # absolute coordinates along the swept axis, ascending
    gains: np.ndarray  # amplitude gains in [0, 1]
    resolution: float


def cross_section(
    cfg: ArrayConfig,
    center: tuple,
    axis: str,
    halfwidth: float,
    resolution: float,
) -> CrossSection:
    """Sample the gain profile through (theta0, s0) along one axis."""
    if axis not in ("angle", "surrogate"):
        raise ValueError("axis must be 'angle' or 'surrogate'")
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    if halfwidth <= resolution:
        raise ValueError("halfwidth must exceed the resolution")
    theta0, s0 = center
    offs = np.arange(-halfwidth, halfwidth + resolution / 2, resolution)
    if axis == "angle":
        gains = pattern_gain(cfg, offs, 0.0)
        return CrossSection("angle", s0, theta0 + offs, gains, resolution)
    gains = pattern_gain(cfg, 0.0, offs)
    return CrossSection("surrogate", theta0, s0 + offs, gains, resolution)


def width_3db(profile: CrossSection) -> float:
    """3 dB width: distance between the 1/sqrt(2) amplitude crossings.

    Crossings adjacent to the peak are located by linear interpolation
    between the bracketing samples.  Raises if the peak is below the
    threshold or either crossing falls outside the sampled span.
    """
    g = profile.gains
    x = profile.coords
    p = int(np.argmax(g))
    if g[p] < HALF_AMP + 1e-9:
        raise ValueError("profile peak does not reach the 3 dB threshold")

    def interp(i, j):
        return x[i] + (HALF_AMP - g[i]) * (x[j] - x[i]) / (g[j] - g[i])

    left = None
    for i in range(p, 0, -1):
        if g[i - 1] < HALF_AMP <= g[i]:
            left = interp(i - 1, i)
            break
    right = None
    for i in range(p, len(g) - 1):
        if g[i + 1] < HALF_AMP <= g[i]:
            right = interp(i + 1, i)
            break
    if left is None or right is None:
        raise ValueError("span too narrow: no 3 dB crossing on both sides")
    return right - left


def predict_high_mainlobe_widths(cfg: ArrayConfig) -> tuple:
    """Closed-form 3 dB width predictions (angle 2/N, surrogate 7/N^2).

    Validated at half-wavelength spacing only; other spacings get the same
    formulas with a warning.
    """
    if cfg.spacing != cfg.wavelength / 2:
        warnings.warn(
            "width laws are validated at half-wavelength spacing only",
            stacklevel=2,
        )
    n = cfg.num_antennas
    return 2.0 / n, 7.0 / n**2


@dataclass(frozen=True)
class MainlobeFit:
    """Axis-aligned Gaussian model of the high mainlobe, on power gain.

    P(dt, ds) = g0 exp(-dt^2 / (2 sigma_theta^2) - ds^2 / (2 sigma_s^2));
    mean_abs_dev is the mean |P_true - P_fit| over the fit region.
    """

    center: tuple
    g0: float
    sigma_theta: float
    sigma_s: float
    mean_abs_dev: float
    num_points: int

    def power(self, d_theta, d_s):
        """Fitted power gain at an offset from the center."""
        q = (
            np.asarray(d_theta, dtype=float) ** 2 / (2 * self.sigma_theta**2)
            + np.asarray(d_s, dtype=float) ** 2 / (2 * self.sigma_s**2)
        )
        return self.g0 * np.exp(-q)

    def gain_ratio(self, d_theta, d_s):
        """Predicted amplitude gain relative to perfect pointing (1 at 0)."""
        return np.sqrt(self.power(d_theta, d_s) / self.g0)

    @property
    def widths_3db(self) -> tuple:
        """Half-power widths 2 sigma sqrt(2 ln 2) per axis."""
        k = 2 * math.sqrt(2 * math.log(2))
        return k * self.sigma_theta, k * self.sigma_s


def fit_log_gaussian(d_theta, d_s, power) -> tuple:
    """Least-squares fit of ln(power) to the axis-aligned quadratic.

    Returns (g0, sigma_theta, sigma_s).  Raises on degenerate sample sets:
    fewer than 9 points, no spread on one axis, or non-concave fitted
    curvature.
    """
    dt = np.asarray(d_theta, dtype=float).ravel()
    ds = np.asarray(d_s, dtype=float).ravel()
    p = np.asarray(power, dtype=float).ravel()
    if dt.size < 9:
        raise ValueError("fit region must contain at least 9 samples")
    if np.unique(dt).size < 3 or np.unique(ds).size < 3:
        raise ValueError("fit region is degenerate: needs spread on both axes")
    if np.any(p <= 0):
        raise ValueError("power gains must be positive inside the fit region")
    design = np.column_stack([np.ones_like(dt), -0.5 * dt**2, -0.5 * ds**2])
    coef, *_ = np.linalg.lstsq(design, np.log(p), rcond=None)
    ln_g0, inv_t2, inv_s2 = coef
    if inv_t2 <= 0 or inv_s2 <= 0:
        raise ValueError("fit is not concave: region spans beyond the mainlobe")
    return math.exp(ln_g0), 1 / math.sqrt(inv_t2), 1 / math.sqrt(inv_s2)


def gaussian_fit(
    cfg: ArrayConfig,
    center: tuple,
    threshold: float = 0.5,
    half_spans: tuple = None,
    samples: int = 25,
) -> MainlobeFit:
    """Fit the Gaussian mainlobe model around a focused center.

    Power gains are sampled on a samples x samples rectangle around the
    center (default +-1.1/N by +-4.5/N^2, slightly beyond the half-power
    region) and points with normalized power >= threshold enter the fit.
    """
    n = cfg.num_antennas
    if half_spans is None:
        half_spans = (1.1 / n, 4.5 / n**2)
    ht, hs = half_spans
    t = np.linspace(-ht, ht, samples)
    s = np.linspace(-hs, hs, samples)
    tt, ss = np.meshgrid(t, s, indexing="ij")
    power = pattern_gain(cfg, tt, ss) ** 2
    mask = power >= threshold
    g0, sig_t, sig_s = fit_log_gaussian(tt[mask], ss[mask], power[mask])
    fitted = g0 * np.exp(
        -0.5 * (tt[mask] / sig_t) ** 2 - 0.5 * (ss[mask] / sig_s) ** 2
    )
    dev = float(np.abs(fitted - power[mask]).mean())
    return MainlobeFit(
        center=tuple(center),
        g0=g0,
        sigma_theta=sig_t,
        sigma_s=sig_s,
        mean_abs_dev=dev,
        num_points=int(mask.sum()),
    )


def contour_ellipse(fit: MainlobeFit, level: float) -> tuple:
    """Semi-axes (a_theta, a_s) of the fitted-gain contour at a power level.

    a = sigma sqrt(2 ln(g0 / level)) per axis; points on the ellipse have
    fitted power exactly equal to level.
    """
    if not 0 < level < fit.g0:
        raise ValueError("contour level must lie in (0, g0)")
    k = math.sqrt(2 * math.log(fit.g0 / level))
    return k * fit.sigma_theta, k * fit.sigma_s


@dataclass(frozen=True)
class PspPrediction:
    """Stationary-phase predictions for the low mainlobe at offset d_s."""

    d_s: float
    width: float  # 2 N d_s
    avg_gain: float  # 1 / (N sqrt(d_s))


def psp_predict(cfg: ArrayConfig, d_s: float) -> PspPrediction:
    """Predict low-mainlobe width and average gain at surrogate offset d_s.

    Valid only well outside the high mainlobe (d_s >= 20/N^2); the width law
    is linear in d_s and the squared gain law inverse in d_s, so
    avg_gain^2 * width * N = 2 identically.
    """
    n = cfg.num_antennas
    if d_s < PSP_FLOOR / n**2:
        raise ValueError(
            f"d_s below the stationary-phase validity floor {PSP_FLOOR}/N^2"
        )
    return PspPrediction(d_s, 2 * n * d_s, 1 / (n * math.sqrt(d_s)))


@dataclass(frozen=True)
class PspMeasurement:
    """Brute-force plateau measurement at surrogate offset d_s."""

    d_s: float
    width: float
    avg_gain: float
    resolution: float


def low_mainlobe_measure(
    cfg: ArrayConfig, d_s: float, resolution: float = None
) -> PspMeasurement:
    """Measure the low-mainlobe plateau width and mean amplitude gain.

    The angle profile at surrogate offset d_s is swept over
    +-(1.6 N d_s + 8 res).  The plateau level is estimated on the central
    half of the half-of-max extent (the full extent dips at the tapered
    edges), the width is taken between the outermost linearly interpolated
    crossings of half that level, and the average gain is the mean over the
    enclosed samples.
    """
    n = cfg.num_antennas
    resolution = resolution if resolution is not None else 1 / (8 * n)
    if resolution > 1 / (4 * n):
        raise ValueError("resolution must be at most 1/(4N)")
    if 2 * n * d_s < 8 * resolution:
        raise ValueError("plateau not resolved: d_s too small for this resolution")
    half = 1.6 * n * d_s + 8 * resolution
    # the angle pattern is 2-periodic; past half = 1 the plateau alias
    # from the neighboring period enters the sweep
    if half > 1:
        raise ValueError("plateau spans the angle domain at this offset")
    dts = np.arange(-half, half + resolution / 2, resolution)
    g = pattern_gain(cfg, dts, np.full_like(dts, d_s))
    idx = np.nonzero(g >= 0.5 * g.max())[0]
    span = idx[-1] - idx[0]
    if span < 4:
        raise ValueError("plateau not detected at this offset")
    lo, hi = idx[0] + span // 4, idx[-1] - span // 4
    thr = 0.5 * g[lo : hi + 1].mean()
    idx = np.nonzero(g >= thr)[0]
    i0, i1 = idx[0], idx[-1]
    if i0 == 0 or i1 == len(g) - 1:
        raise ValueError("plateau reaches the sweep edge; widen the window")
    xl = dts[i0 - 1] + (thr - g[i0 - 1]) * (dts[i0] - dts[i0 - 1]) / (g[i0] - g[i0 - 1])
    xr = dts[i1] + (thr - g[i1]) * (dts[i1 + 1] - dts[i1]) / (g[i1 + 1] - g[i1])
    inside = (dts >= xl) & (dts <= xr)
    return PspMeasurement(d_s, xr - xl, float(g[inside].mean()), resolution)


def partition_energy(bmap, cfg: ArrayConfig, center: tuple) -> dict:
    """Split each map row's energy into high / low mainlobe and sidelobe.

    The partition is geometric and exhaustive: around the center, high
    mainlobe is |d_theta| <= 1/N and |d_s| <= 3.5/N^2; low mainlobe is the
    remaining plateau wedge |d_theta| <= N |d_s|; sidelobe is the rest.
    Returns per-row energy arrays whose sums match the row totals.
    """
    grid = bmap.grid
    theta0, s0 = center
    energy = np.abs(bmap.coefficients) ** 2
    n = cfg.num_antennas
    dt = grid.angles - theta0
    out = {"high": [], "low": [], "side": []}
    for l, s in enumerate(grid.surrogates):
        ds = s - s0
        high = (np.abs(dt) <= 1 / n) & (abs(ds) <= 3.5 / n**2)
        low = (np.abs(dt) <= n * abs(ds)) & ~high
        side = ~(high | low)
        row = energy[l]
        out["high"].append(row[high].sum())
        out["low"].append(row[low].sum())
        out["side"].append(row[side].sum())
    return {k: np.array(v) for k, v in out.items()}
