"""Transit supply/demand analytics toolkit.

Census block apportionment, stop service coverage, temporal and spatial
supply/demand regressors, gradient-based predictor significance, and
service-gap scoring, with a CLI pipeline and a what-if scenario service.
"""

__version__ = "0.1.0"

from .analysis import (
    GapRatio,
    GapReport,
    GapThresholds,
    LinearLink,
    SignificanceReport,
    assess_gaps,
    fit_linear_link,
    gap_ratio,
    predict_trips,
    scenario_demand,
    significance,
)
from .census import (
    BlockGroup,
    BlockProfile,
    CensusBlock,
    CensusIndex,
    CensusTract,
    StopProfile,
    apportion_to_blocks,
    attach_coverage,
    blocks_served,
    haversine_miles,
    load_census,
    stop_profile,
    unserviced_blocks,
)
from .ingest import (
    Dataset,
    FeatureSpec,
    MonthlyRecord,
    SpatialRow,
    StopRecord,
    adjusted_population,
    build_design_matrix,
    encode_month,
    load_calendar,
    load_monthly,
    load_stops,
    spatial_rows,
    train_test_split,
)
from .models import (
    MetricReport,
    ModelArtifact,
    finite_difference_gradient,
    fit,
    fit_linear,
    fit_neural_net,
    fit_polynomial,
    fit_random_forest,
    input_gradient,
    load_artifact,
    metrics,
    predict,
    save_artifact,
)
