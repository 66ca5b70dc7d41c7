"""sparsecode: expand-and-sparsify representations and their approximation
properties, measured.

An input x on the unit sphere is mapped to a high-dimensional sparse binary
code in two steps: a random linear expansion y = R x, then sparsification by
k-winner-take-all or per-unit calibrated thresholding. A linear readout whose
weight per unit is the average target value over that unit's response region
approximates any Lipschitz function of x, and the metrics module measures
how the approximation error scales with the code size m.
"""

from .approximator import (
    ApproximatorModel,
    GoodnessCriterion,
    all_good,
    classify_good,
    learn_weights,
    predict,
    predict_batch,
    reach_band,
    sup_error,
)
from .config import ExperimentConfig, KRule, config_from_dict, load_config_file
from .container import Container, load, save, save_model
from .encoder import (
    ExpansionMatrix,
    KWinners,
    SparseCode,
    ThresholdVector,
    build_expansion,
    calibrate_thresholds,
    encode,
    expand,
    expand_batch,
    iter_code_masks,
    sparsify_kwta,
    sparsify_threshold,
)
from .errors import (
    CalibrationError,
    ConfigError,
    DegenerateProjectionError,
    DomainError,
    FitError,
    ParameterError,
    ShapeError,
)
from .geometry import (
    DistributionSpec,
    Manifold,
    TargetFunction,
    as_unit_vector,
    beta_tail,
    cap_measure_exact,
    circle,
    circle_tube_measure,
    constant,
    coordinate,
    cosine_to_point,
    data_attuned,
    evaluate_target,
    full_sphere,
    gaussian,
    mc_beta_tail,
    mc_cap_measure,
    mc_circle_tube_measure,
    project_to_manifold,
    sample_expansion_rows,
    sample_input,
    sub_sphere,
    triangular,
    uniform_sphere,
)
from .metrics import (
    GridPoint,
    ScalingResult,
    UsageProfile,
    UsageScalingResult,
    derive_seed,
    fit_slope,
    run_rate_sweep,
    run_usage_probe,
    usage_scaling,
)

__version__ = "0.1.0"
