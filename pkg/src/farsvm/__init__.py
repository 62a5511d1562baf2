"""FAR-controllable sea-surface small-target detection.

Pipeline: synthesize or load multi-cell radar returns -> slide amplitude
windows -> compute (entropy, Hurst, spectral peak-to-average) features ->
train a class-weighted RBF-kernel SVM whose clutter penalty is bisected
until the empirical training false-alarm rate matches the requested target
-> evaluate detection probability on held-out target windows.
"""

from .errors import (
    DegenerateInput,
    EmptyTestSet,
    EmptyTrainingSet,
    FarSvmError,
    InconsistentCells,
    InfeasibleToleranceWarning,
    InvalidParameter,
    InvalidWindow,
    MalformedFile,
    MissingMetadata,
    NoClutter,
    NoClutterSamples,
    NonConvergenceWarning,
    NoTargets,
    SecondaryCellNotAllowed,
    SingleClassData,
)
from .evaluation import (
    ClutterPolicy,
    DetectorReport,
    RocPoint,
    SplitSpec,
    average_roc,
    detection_probability,
    hurst_threshold_baseline,
    roc_sweep,
    save_report,
    save_roc_csv,
    split,
)
from .far_controller import (
    ControllerTrace,
    FarTarget,
    IterationRecord,
    empirical_far,
    fit_with_far,
    save_trace,
)
from .features import (
    FeatureConfig,
    FeatureVector,
    NormalizationStats,
    apply_normalization,
    default_tau_grid,
    extract,
    extract_batch,
    fit_hurst,
    fit_normalization,
    fpar,
    load_features,
    normalize_batch,
    rescaled_range_curve,
    save_features,
    the,
    tie,
    vectors_to_arrays,
)
from .signal_model import (
    CellRole,
    ComplexSeries,
    Dataset,
    FileFormat,
    Label,
    Polarization,
    Segment,
    SyntheticOrigin,
    load_dataset,
    save_dataset,
    segment_cell,
    segment_dataset,
    synthesize_dataset,
)
from .svm_core import (
    KernelConfig,
    SvmModel,
    TrainConfig,
    TrainingMeta,
    active_engine,
    decide,
    decide_batch,
    load_model,
    rbf_kernel,
    save_model,
    train,
    train_unweighted,
)

__version__ = "0.1.0"
