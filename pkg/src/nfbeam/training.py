"""Codebooks, beam training, closed-form refinement, and beam tracking.

Measurement convention: a pilot observation is y = <w, h> + noise with a
unit-norm beam w, and the SNR is per-antenna pilot SNR, i.e. the complex
noise variance is ||h||^2 10^(-SNR/10) / N.  The achieved gain ratio rho of
a beam is |<w, h>| normalized by the best gain over an exhaustive reference
codebook, so rho can exceed 1 when refinement beats the reference lattice.
"""

import math
from dataclasses import dataclass

import numpy as np

from .arrays import (
    ArrayConfig,
    SteeringVector,
    _quadratic_phase,
    field_boundaries,
    range_of,
    steering_exact,
    surrogate_coords,
)
from .beamspace import BeamspaceGrid, default_grid
from .mainlobe import gaussian_fit

__all__ = [
    "MeasurementModel",
    "Codeword",
    "Codebook",
    "polar_codebook",
    "chirp_codebook",
    "TrainingResult",
    "train_exhaustive",
    "HierarchicalTrainer",
    "train_hierarchical",
    "RefinedEstimate",
    "refine_gaussian",
    "RefinementOutcome",
    "refine_measured",
    "SlotRecord",
    "TrackResult",
    "track",
]


def _as_channel(h) -> np.ndarray:
    return h.elements if isinstance(h, SteeringVector) else np.asarray(h, dtype=complex)


class MeasurementModel:
    """Seeded pilot channel: y = <w, h> + CN(0, sigma^2) per observation.

    sigma^2 = ||h||^2 10^(-snr_db/10) / N per complex pilot; snr_db = inf
    gives noiseless pilots but still consumes RNG draws, so a run's draw
    count is independent of the SNR.  draws counts every observation ever
    produced, which is the pilot-overhead ledger of the procedures here.
    """

    def __init__(self, snr_db: float, seed: int):
        self.snr_db = float(snr_db)
        self.seed = int(seed)
        self._rng = np.random.default_rng(seed)
        self.draws = 0

    def _sigma(self, h: np.ndarray) -> float:
        scale = 10 ** (-self.snr_db / 20) if math.isfinite(self.snr_db) else 0.0
        return float(np.linalg.norm(h)) * scale / math.sqrt(h.size)

    def measure(self, w, h) -> complex:
        """One pilot observation through beam w."""
        w = _as_channel(w)
        h = _as_channel(h)
        z = self._rng.standard_normal(2)
        self.draws += 1
        sigma = self._sigma(h)
        return complex(np.vdot(w, h)) + sigma * (z[0] + 1j * z[1]) / math.sqrt(2)

    def measure_many(self, weights: np.ndarray, h) -> np.ndarray:
        """One observation per row of the weight matrix, in row order."""
        h = _as_channel(h)
        m = weights.shape[0]
        z = self._rng.standard_normal((m, 2))
        self.draws += m
        sigma = self._sigma(h)
        return weights.conj() @ h + sigma * (z[:, 0] + 1j * z[:, 1]) / math.sqrt(2)


@dataclass(frozen=True)
class Codeword:
    """Beam label on the owning codebook's lattice plus its stage tag."""

    theta: float
    s: float
    stage: str


@dataclass(frozen=True, eq=False)
class Codebook:
    """Codeword labels plus the stacked weight matrix (one beam per row)."""

    cfg: ArrayConfig
    codewords: tuple
    matrix: np.ndarray

    def __len__(self):
        return len(self.codewords)

    def weights(self, i: int) -> np.ndarray:
        return self.matrix[i]

    def best_gain(self, h) -> float:
        """Noiseless best gain max_i |<w_i, h>| (the rho denominator)."""
        return float(np.abs(self.matrix.conj() @ _as_channel(h)).max())


def _beam_matrix(cfg: ArrayConfig, thetas, s_hats) -> np.ndarray:
    """Stack of quadratic-phase beams at paired (theta, s_hat) labels."""
    return np.stack(
        [_quadratic_phase(cfg, t, s) for t, s in zip(thetas, s_hats)]
    )


def polar_codebook(cfg: ArrayConfig, grid: BeamspaceGrid = None) -> Codebook:
    """Exhaustive codebook: one focused beam per beamspace grid point.

    Rows are ordered row-major (surrogate row, then angle), matching the
    flat indexing of BeamspaceMap coefficients.  Defaults give 512 x 11 =
    5632 codewords.
    """
    if grid is None:
        grid = default_grid(cfg)
    g = 2 * cfg.spacing / cfg.wavelength
    delta = cfg.offsets
    lin = np.exp(1j * np.pi * g * np.outer(grid.angles, delta)) / math.sqrt(
        cfg.num_antennas
    )
    blocks = []
    words = []
    for s in grid.surrogates:
        blocks.append(lin * np.exp(-1j * np.pi * s * delta**2))
        words.extend(Codeword(float(t), float(s), "exhaustive") for t in grid.angles)
    return Codebook(cfg, tuple(words), np.concatenate(blocks, axis=0))


def chirp_codebook(cfg: ArrayConfig, k1: int, s_row: float = 0.0) -> Codebook:
    """Wide coarse beams: K1 chirps whose low mainlobes tile theta in [-1, 1).

    Each beam sits at angle center -1 + (2k+1)/K1 with surrogate offset
    1/(K1 N) above the probed row, so its plateau width 2 N (1/(K1 N)) =
    2/K1 exactly covers one sector.
    """
    if k1 < 2:
        raise ValueError("need at least 2 coarse beams")
    if k1 > cfg.num_antennas:
        raise ValueError("over-resolved: more coarse beams than antennas")
    centers = -1 + (2 * np.arange(k1) + 1) / k1
    s_c = s_row + 1 / (k1 * cfg.num_antennas)
    words = tuple(Codeword(float(t), float(s_c), "coarse") for t in centers)
    return Codebook(cfg, words, _beam_matrix(cfg, centers, np.full(k1, s_c)))


@dataclass(frozen=True, eq=False)
class TrainingResult:
    """Outcome of a training procedure.

    log holds one (stage, theta, s, magnitude) record per pilot, so
    pilots == len(log) always.
    """

    method: str
    theta: float
    s: float
    rho: float
    pilots: int
    log: tuple


def train_exhaustive(h, book: Codebook, mm: MeasurementModel) -> TrainingResult:
    """Sweep every codeword once and pick the largest pilot magnitude.

    Ties break to the lowest codeword index.  rho is normalized by the
    noiseless best gain over the same book, so it equals 1 at infinite SNR.
    """
    if len(book) == 0:
        raise ValueError("codebook is empty")
    h = _as_channel(h)
    y = mm.measure_many(book.matrix, h)
    mags = np.abs(y)
    best = int(np.argmax(mags))
    cw = book.codewords[best]
    rho = abs(np.vdot(book.matrix[best], h)) / book.best_gain(h)
    log = tuple(
        (w.stage, w.theta, w.s, float(m)) for w, m in zip(book.codewords, mags)
    )
    return TrainingResult("exhaustive", cw.theta, cw.s, float(rho), len(book), log)


# probe layout tuned on Monte Carlo sweeps: angle offsets as fractions of the
# sector width, curvature offsets in 1/N^2 units above the probe row; the
# spread (not the exact values) is what matters -- the probes must differ
# enough in angle and chirp rate to make the grid search well conditioned
PROBE_ANGLE_FRACS = (-0.36, -0.20, -0.08, 0.0, 0.12, 0.24, 0.36)
PROBE_CURVATURES = (130.0, 200.0, 300.0, 160.0, 420.0, 130.0, 240.0)


class HierarchicalTrainer:
    """Two-stage low-overhead training: coarse sectors, then wide probes.

    Stage 1 sweeps K1 chirp codewords whose plateaus tile the angle axis and
    keeps the best sector.  Stage 2 sweeps `num_probes` wide chirp probes
    spread in angle and chirp rate around that sector.  The location
    estimate is a matched-correlation grid search over all K1 + num_probes
    pilot responses against precomputed per-sector response tables (angle
    step 1/(2N) over the sector plus margin, surrogate step 1/N^2 from 0 to
    the value at the inner near-field boundary).

    Tables cost O(K1 (K1+P) S A N) once per configuration; training a user
    afterwards costs K1 + num_probes pilots and one table scan.
    """

    def __init__(
        self,
        cfg: ArrayConfig,
        k1: int = 8,
        num_probes: int = 7,
        angle_margin: float = 0.07,
        s_ceiling: float = None,
    ):
        if k1 < 2:
            raise ValueError("need at least 2 sectors")
        if num_probes < 1:
            raise ValueError("need at least one probe")
        self.cfg = cfg
        self.k1 = k1
        self.num_probes = num_probes
        n = cfg.num_antennas
        nsq = n * n

        if s_ceiling is None:
            # surrogate value at the inner boundary of the radiating near
            # field (broadside); users live below it
            s_ceiling = cfg.wavelength / (4 * field_boundaries(cfg).fresnel)
        self.s_ceiling = s_ceiling

        self.s_probe = 0.5 * s_ceiling
        self.sector_centers = -1 + (2 * np.arange(k1) + 1) / k1
        self.stage1 = chirp_codebook(cfg, k1, s_row=self.s_probe)

        sector_width = 2 / k1
        if num_probes == len(PROBE_ANGLE_FRACS):
            fracs = np.array(PROBE_ANGLE_FRACS)
            curv = np.array(PROBE_CURVATURES)
        else:
            fracs = np.linspace(-0.36, 0.36, num_probes)
            curv = np.geomspace(130.0, 420.0, num_probes)
        self.probe_offsets = fracs * sector_width
        self.probe_s = self.s_probe + curv / nsq

        step_t = 1 / (2 * n)
        span = 1 / k1 + angle_margin
        self.theta_rel = np.arange(-span, span + step_t / 2, step_t)
        self.s_grid = np.arange(0.0, s_ceiling + 1.2 / nsq, 1 / nsq)

        self._tables = {}
        g = 2 * cfg.spacing / cfg.wavelength
        delta = cfg.offsets
        for si, c in enumerate(self.sector_centers):
            ths = c + self.theta_rel
            labels = [(t, self.stage1.codewords[0].s) for t in self.sector_centers]
            labels += [
                (c + self.probe_offsets[j], self.probe_s[j])
                for j in range(num_probes)
            ]
            tabs = np.empty(
                (len(labels), len(self.s_grid), len(ths)), dtype=complex
            )
            for i, (p, sc) in enumerate(labels):
                lin = np.exp(1j * np.pi * g * np.outer(ths - p, delta))
                for l, s in enumerate(self.s_grid):
                    tabs[i, l] = lin @ np.exp(-1j * np.pi * delta**2 * (s - sc)) / n
            probes = _beam_matrix(
                cfg,
                [lab[0] for lab in labels[k1:]],
                [lab[1] for lab in labels[k1:]],
            )
            self._tables[si] = (labels, tabs, probes)

    @property
    def pilot_count(self) -> int:
        return self.k1 + self.num_probes

    def train(self, h, mm: MeasurementModel, reference: Codebook = None) -> TrainingResult:
        """Run both stages on one channel; K1 + num_probes pilots total."""
        h = _as_channel(h)
        y1 = mm.measure_many(self.stage1.matrix, h)
        sector = int(np.argmax(np.abs(y1)))
        labels, tabs, probes = self._tables[sector]
        y2 = mm.measure_many(probes, h)
        y = np.concatenate([y1, y2])

        # matched-correlation score over the local grid: the candidate whose
        # modeled responses best explain all pilots jointly
        num = np.abs(np.einsum("ilk,i->lk", tabs.conj(), y)) ** 2
        den = (np.abs(tabs) ** 2).sum(axis=0)
        l, k = np.unravel_index(int(np.argmax(num / den)), num.shape)
        theta = self.sector_centers[sector] + self.theta_rel[k]
        if theta >= 1:
            theta -= 2
        elif theta < -1:
            theta += 2
        s_hat = self.s_grid[l]

        if reference is None:
            reference = polar_codebook(self.cfg)
        rho = abs(np.vdot(_quadratic_phase(self.cfg, theta, s_hat), h))
        rho /= reference.best_gain(h)
        log = tuple(
            (w.stage, w.theta, w.s, float(m))
            for w, m in zip(self.stage1.codewords, np.abs(y1))
        ) + tuple(
            ("probe", lab[0], lab[1], float(m))
            for lab, m in zip(labels[self.k1 :], np.abs(y2))
        )
        return TrainingResult(
            "hierarchical", float(theta), float(s_hat), float(rho), len(log), log
        )


def train_hierarchical(
    h,
    cfg: ArrayConfig,
    mm: MeasurementModel,
    k1: int = 8,
    num_probes: int = 7,
    reference: Codebook = None,
) -> TrainingResult:
    """One-shot convenience wrapper; builds the trainer tables each call.

    For Monte Carlo loops construct a HierarchicalTrainer once and reuse it.
    """
    return HierarchicalTrainer(cfg, k1, num_probes).train(h, mm, reference)


@dataclass(frozen=True)
class RefinedEstimate:
    """Off-grid location estimate from stencil interpolation."""

    theta: float
    s: float
    range_m: float


def refine_gaussian(
    cfg: ArrayConfig, center: tuple, gains: np.ndarray, spacing: tuple
) -> RefinedEstimate:
    """Closed-form peak interpolation on a 3x3 gain stencil.

    gains[i, j] is the measured amplitude at (s0 + (i-1) hs, theta0 +
    (j-1) ht).  Per axis the log-gain parabola through the three samples
    peaks at offset (h/2)(ln g+ - ln g-)/(2 ln g0 - ln g+ - ln g-); under
    the Gaussian mainlobe model this is exact.  Offsets are clamped to +-h
    and a flat (non-concave) axis contributes zero offset.
    """
    g = np.asarray(gains, dtype=float)
    if g.shape != (3, 3):
        raise ValueError("stencil must be 3x3")
    if np.any(g <= 0):
        raise ValueError("stencil gains must be positive")
    if g.max() > g[1, 1]:
        raise ValueError("stencil center is not the maximum")
    theta0, s0 = center
    ht, hs = spacing

    def axis_offset(lo, mid, hi, h):
        den = 2 * math.log(mid) - math.log(lo) - math.log(hi)
        if den <= 0:
            return 0.0
        off = 0.5 * h * (math.log(hi) - math.log(lo)) / den
        return float(np.clip(off, -h, h))

    d_theta = axis_offset(g[1, 0], g[1, 1], g[1, 2], ht)
    d_s = axis_offset(g[0, 1], g[1, 1], g[2, 1], hs)
    theta = theta0 + d_theta
    s_hat = max(s0 + d_s, 0.0)
    return RefinedEstimate(theta, s_hat, range_of(cfg, theta, s_hat))


@dataclass(frozen=True)
class RefinementOutcome:
    """A measured stencil round: the estimate plus bookkeeping."""

    estimate: RefinedEstimate
    center: tuple
    peak_gain: float
    pilots: int
    centered: bool


def _measure_stencil(cfg, h, mm, center, spacing):
    theta0, s0 = center
    ht, hs = spacing
    g = np.empty((3, 3))
    for i, ds in enumerate((-hs, 0.0, hs)):
        for j, dt in enumerate((-ht, 0.0, ht)):
            w = _quadratic_phase(cfg, theta0 + dt, max(s0 + ds, 0.0))
            g[i, j] = abs(mm.measure(w, h))
    return g


def refine_measured(
    cfg: ArrayConfig,
    h,
    mm: MeasurementModel,
    center: tuple,
    spacing: tuple,
    max_recenter: int = 3,
) -> RefinementOutcome:
    """Measure a 3x3 stencil and interpolate, re-centering on the max first.

    If the measured maximum is off-center the stencil walks there (re-paying
    9 pilots per move, up to max_recenter moves).  If it still is not
    centered, the best measured cell is returned without interpolation.
    """
    h = _as_channel(h)
    theta0, s0 = center
    ht, hs = spacing
    pilots0 = mm.draws
    g = _measure_stencil(cfg, h, mm, (theta0, s0), spacing)
    moves = 0
    while g.max() > g[1, 1] and moves < max_recenter:
        i, j = np.unravel_index(int(np.argmax(g)), (3, 3))
        theta0 += (j - 1) * ht
        s0 = max(s0 + (i - 1) * hs, 0.0)
        g = _measure_stencil(cfg, h, mm, (theta0, s0), spacing)
        moves += 1
    pilots = mm.draws - pilots0
    if g.max() > g[1, 1]:
        i, j = np.unravel_index(int(np.argmax(g)), (3, 3))
        theta = theta0 + (j - 1) * ht
        s_hat = max(s0 + (i - 1) * hs, 0.0)
        est = RefinedEstimate(theta, s_hat, range_of(cfg, theta, s_hat))
        return RefinementOutcome(est, (theta0, s0), float(g.max()), pilots, False)
    est = refine_gaussian(cfg, (theta0, s0), g, spacing)
    return RefinementOutcome(est, (theta0, s0), float(g.max()), pilots, True)


@dataclass(frozen=True)
class SlotRecord:
    slot: int
    rho: float
    retrained: bool


@dataclass(frozen=True, eq=False)
class TrackResult:
    """Per-slot tracking trace plus the pilot and loss bookkeeping."""

    records: tuple
    pilots: int
    lost_at: int  # slot index, or None while tracking holds

    @property
    def mean_rho(self) -> float:
        return float(np.mean([r.rho for r in self.records]))

    @property
    def retrain_slots(self) -> tuple:
        return tuple(r.slot for r in self.records if r.retrained)


# longest motion lead applied at a re-training, in slots
LEAD_HORIZON = 16.0


def track(
    trajectory,
    cfg: ArrayConfig,
    mm: MeasurementModel,
    gamma: float,
    initial: tuple = None,
    stencil: tuple = None,
) -> TrackResult:
    """Hold-or-retrain beam tracking over a trajectory of SourceLocations.

    The first two slots are the alignment: a measured stencil fix each,
    which also establishes the dead-reckoned velocity in (theta, s).  From
    then on the beam is held while the Gaussian-model amplitude ratio at
    the dead-reckoned user offset stays >= gamma, and a stencil re-training
    fires when it drops below.  On re-training the new beam leads the fix
    along the motion by v min(sqrt(-ln(gamma)/q), 16), q = v_t^2/(4 sig_t^2)
    + v_s^2/(4 sig_s^2), which centers the dwell window on the beam instead
    of entering it at the trailing edge.  The 16-slot cap keeps the lead
    displacement proportional to the actual speed: without it the lead is
    scale-free (always the full gamma-contour radius along the motion), and
    a numerically tiny velocity estimate would park the beam a whole dwell
    radius away from a static user.

    A re-training whose best stencil magnitude collapses below 0.3x the
    level at the last good fix counts as failed; two consecutive failures
    declare the user lost and tracking stops at that slot.

    gamma = 0 never re-trains after alignment.  initial defaults to the
    first location's beamspace coordinates quantized to (1/N, 4/N^2) cells,
    standing in for the coarse cell handed over by training.
    """
    if not 0 <= gamma < 1:
        raise ValueError("gamma must lie in [0, 1)")
    traj = list(trajectory)
    if len(traj) < 2:
        raise ValueError("trajectory needs at least two slots")
    n = cfg.num_antennas
    if stencil is None:
        stencil = (1 / n, 3 / n**2)
    if initial is None:
        t0, s0 = surrogate_coords(cfg, traj[0])
        initial = (
            round(t0 * n) / n,
            max(round(s0 * n**2 / 4) * 4 / n**2, 0.0),
        )

    fit = gaussian_fit(cfg, (0.0, 0.0))
    sig_t, sig_s = fit.sigma_theta, fit.sigma_s

    def lead_time(v):
        if gamma <= 0:
            return 0.0
        q = v[0] ** 2 / (4 * sig_t**2) + v[1] ** 2 / (4 * sig_s**2)
        if q == 0:
            return 0.0
        return min(math.sqrt(-math.log(max(gamma, 0.1)) / q), LEAD_HORIZON)

    channels = [steering_exact(cfg, loc).elements for loc in traj]
    pilots0 = mm.draws
    records = []
    lost_at = None

    out0 = refine_measured(cfg, channels[0], mm, initial, stencil)
    fix = np.array([out0.estimate.theta, out0.estimate.s])
    beam = fix.copy()
    ref_level = out0.peak_gain
    records.append(SlotRecord(0, _slot_rho(cfg, beam, channels[0]), True))

    out1 = refine_measured(cfg, channels[1], mm, tuple(fix), stencil)
    new_fix = np.array([out1.estimate.theta, out1.estimate.s])
    vel = new_fix - fix
    fix, fix_slot = new_fix, 1
    ref_level = max(ref_level, out1.peak_gain)
    beam = fix + vel * lead_time(vel)
    records.append(SlotRecord(1, _slot_rho(cfg, beam, channels[1]), True))

    failures = 0
    for t in range(2, len(traj)):
        pred = fix + vel * (t - fix_slot)
        retrained = False
        if gamma > 0 and fit.gain_ratio(pred[0] - beam[0], pred[1] - beam[1]) < gamma:
            retrained = True
            out = refine_measured(
                cfg, channels[t], mm, (pred[0], max(pred[1], 0.0)), stencil
            )
            if out.peak_gain < 0.3 * ref_level:
                failures += 1
                if failures >= 2:
                    lost_at = t
                    records.append(
                        SlotRecord(t, _slot_rho(cfg, beam, channels[t]), True)
                    )
                    break
            else:
                failures = 0
                ref_level = out.peak_gain
                new_fix = np.array([out.estimate.theta, out.estimate.s])
                vel = (new_fix - fix) / (t - fix_slot)
                fix, fix_slot = new_fix, t
                beam = fix + vel * lead_time(vel)
        records.append(SlotRecord(t, _slot_rho(cfg, beam, channels[t]), retrained))

    return TrackResult(tuple(records), mm.draws - pilots0, lost_at)


def _slot_rho(cfg, beam, h):
    w = _quadratic_phase(cfg, beam[0], max(beam[1], 0.0))
    return float(abs(np.vdot(w, h)) / np.linalg.norm(h))
