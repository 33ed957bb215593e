"""nfbeam: near-field beamspace analysis for extremely large antenna arrays.

Transforms antenna-domain snapshots into a two-dimensional beamspace indexed
by angle and a reciprocal-range surrogate, and builds on that representation:
mainlobe shape analytics, low-complexity beam training and tracking, and
sparse multipath channel estimation.
"""

__version__ = "0.1.0"

from .arrays import (
    ArrayConfig,
    FieldBoundaries,
    SourceLocation,
    SteeringVector,
    classify_region,
    field_boundaries,
    frft_basis,
    range_of,
    steering_exact,
    steering_fresnel,
    surrogate_coords,
)
from .beamspace import (
    BeamspaceGrid,
    BeamspaceMap,
    beamspace_direct,
    beamspace_fast,
    default_grid,
    synthesize,
    uniform_angles,
)
from .estimation import (
    EstimationReport,
    MultipathChannel,
    build_channel,
    nmse,
    omp_estimate,
)
from .mainlobe import (
    CrossSection,
    MainlobeFit,
    PspMeasurement,
    PspPrediction,
    contour_ellipse,
    cross_section,
    fit_log_gaussian,
    gaussian_fit,
    low_mainlobe_measure,
    partition_energy,
    pattern_gain,
    predict_high_mainlobe_widths,
    psp_predict,
    width_3db,
)
from .training import (
    Codebook,
    Codeword,
    HierarchicalTrainer,
    MeasurementModel,
    RefinedEstimate,
    RefinementOutcome,
    SlotRecord,
    TrackResult,
    TrainingResult,
    chirp_codebook,
    polar_codebook,
    refine_gaussian,
    refine_measured,
    track,
    train_exhaustive,
    train_hierarchical,
)

__all__ = [
    "__version__",
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
    "BeamspaceGrid",
    "BeamspaceMap",
    "uniform_angles",
    "default_grid",
    "beamspace_direct",
    "beamspace_fast",
    "synthesize",
    "CrossSection",
    "cross_section",
    "width_3db",
    "pattern_gain",
    "predict_high_mainlobe_widths",
    "MainlobeFit",
    "fit_log_gaussian",
    "gaussian_fit",
    "contour_ellipse",
    "PspPrediction",
    "PspMeasurement",
    "psp_predict",
    "low_mainlobe_measure",
    "partition_energy",
    "MeasurementModel",
    "Codeword",
    "Codebook",
    "polar_codebook",
    "chirp_codebook",
    "TrainingResult",
    "train_exhaustive",
    "train_hierarchical",
    "HierarchicalTrainer",
    "RefinedEstimate",
    "RefinementOutcome",
    "refine_gaussian",
    "refine_measured",
    "SlotRecord",
    "TrackResult",
    "track",
    "MultipathChannel",
    "build_channel",
    "EstimationReport",
    "omp_estimate",
    "nmse",
]
