"""Sparse channel estimation over the beamspace dictionary.

A multipath channel is a superposition of a few steering vectors, so its
beamspace map has a few dominant cells; orthogonal matching pursuit with
the fast transform as the correlation engine recovers them.
"""

import math
from dataclasses import dataclass

import numpy as np

from .arrays import ArrayConfig, frft_basis, steering_exact, steering_fresnel
from .beamspace import BeamspaceGrid, beamspace_fast

__all__ = [
    "MultipathChannel",
    "EstimationReport",
    "build_channel",
    "omp_estimate",
    "nmse",
]


@dataclass(frozen=True, eq=False)
class MultipathChannel:
    """L-path channel h = sum_l gain_l steering(loc_l)."""

    paths: tuple  # of (complex gain, SourceLocation)
    model: str  # "exact" | "fresnel"
    vector: np.ndarray

    @property
    def num_paths(self) -> int:
        return len(self.paths)


def build_channel(cfg: ArrayConfig, paths, model: str = "exact") -> MultipathChannel:
    """Superpose steering vectors; linear in the path gains.

    paths is an iterable of (complex gain, SourceLocation).
    """
    if model not in ("exact", "fresnel"):
        raise ValueError("model must be 'exact' or 'fresnel'")
    steer = steering_exact if model == "exact" else steering_fresnel
    paths = tuple((complex(g), loc) for g, loc in paths)
    if not paths:
        raise ValueError("channel needs at least one path")
    h = np.zeros(cfg.num_antennas, dtype=complex)
    for g, loc in paths:
        h += g * steer(cfg, loc).elements
    return MultipathChannel(paths, model, h)


@dataclass(frozen=True, eq=False)
class EstimationReport:
    """Greedy recovery outcome: supports, gains, and the residual trace."""

    supports: tuple  # of (surrogate row, angle column) grid cells
    gains: np.ndarray
    estimate: np.ndarray
    residual_norms: tuple  # after each iteration, starting from ||y||
    iterations: int
    nmse_db: float  # vs the reference channel, or None


def omp_estimate(
    y,
    grid: BeamspaceGrid,
    cfg: ArrayConfig,
    max_paths: int,
    residual_tol: float = 0.0,
    reference=None,
) -> EstimationReport:
    """Orthogonal matching pursuit over the beamspace basis dictionary.

    Each iteration runs one fast transform of the residual, selects the
    grid cell of largest correlation magnitude (cells never repeat; ties go
    to the lowest flat index), re-fits all selected atoms by least squares,
    and updates the residual.  Stops after max_paths atoms or when the
    residual norm drops to residual_tol.

    Atoms are unit norm by construction, so the correlation map needs no
    column scaling.  reference, when given, is the noiseless channel used
    for the NMSE figure.
    """
    y = np.asarray(y, dtype=complex)
    n = cfg.num_antennas
    if y.shape != (n,):
        raise ValueError("observation length does not match the array size")
    cells = grid.num_surrogates * grid.num_angles
    if not 1 <= max_paths <= min(n, cells):
        raise ValueError("max_paths must lie in [1, min(N, grid cells)]")

    residual = y.copy()
    norms = [float(np.linalg.norm(residual))]
    taken = []
    used = []
    atoms = []
    gains = np.zeros(0, dtype=complex)
    for _ in range(max_paths):
        if norms[-1] <= residual_tol:
            break
        corr = np.abs(beamspace_fast(residual, grid, cfg).coefficients).ravel()
        corr[used] = -1
        flat = int(np.argmax(corr))
        used.append(flat)
        l, k = flat // grid.num_angles, flat % grid.num_angles
        taken.append((l, k))
        atoms.append(
            frft_basis(cfg, float(grid.angles[k]), float(grid.surrogates[l])).elements
        )
        basis_mat = np.stack(atoms, axis=1)
        gains, *_ = np.linalg.lstsq(basis_mat, y, rcond=None)
        residual = y - basis_mat @ gains
        norms.append(float(np.linalg.norm(residual)))

    estimate = np.stack(atoms, axis=1) @ gains if taken else np.zeros(n, complex)
    report_nmse = None
    if reference is not None:
        ref = reference.vector if isinstance(reference, MultipathChannel) else reference
        report_nmse = nmse(ref, estimate)
    return EstimationReport(
        tuple(taken), gains, estimate, tuple(norms), len(taken), report_nmse
    )


def nmse(h, h_hat) -> float:
    """10 log10(||h_hat - h||^2 / ||h||^2); -inf when the estimate is exact."""
    h = np.asarray(h, dtype=complex)
    h_hat = np.asarray(h_hat, dtype=complex)
    if h.shape != h_hat.shape:
        raise ValueError("vectors must have equal length")
    ref = float(np.vdot(h, h).real)
    if ref == 0:
        raise ValueError("reference channel has zero norm")
    err = float(np.vdot(h_hat - h, h_hat - h).real)
    if err == 0:
        return -math.inf
    return 10 * math.log10(err / ref)
