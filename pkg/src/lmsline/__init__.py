"""Exact least-median-of-squares line fitting and robust line detection.

The solver finds the global LMS optimum by searching vertical windows in the
point-line dual plane; the detector uses that solver to refine coarse Hough
peaks so that stray votes in a peak's bin cannot drag the estimate the way
they drag a least-squares refit.
"""

from .backend import (
    BatchPlan,
    CandidateRecord,
    ParallelBackend,
    SequentialBackend,
    get_backend,
    resolve_workers,
    run_phase1,
    run_phase2,
)
from .detect import (
    METHOD_LMS,
    METHOD_OLS,
    METHOD_SHT,
    METHODS,
    LineDetection,
    detect_lines,
    refine_lms,
    refine_ols,
    subsample_support,
)
from .experiments import (
    BenchRow,
    ExperimentConfig,
    MetricRow,
    run_bench,
    run_experiment,
    score_detection,
    summarize,
)
from .geometry import (
    GEOM_EPS,
    Bracelet,
    DegenerateInputError,
    DualIntersection,
    DualLine,
    InvalidInputError,
    LineEq,
    Point2,
    bracelet_at,
    dualize,
    median_sq_residual,
    pair_intersection,
    vertical_cut,
)
from .hough import (
    HoughAccumulator,
    HoughParams,
    Peak,
    extract_points,
    find_peaks,
    hough_vote,
    line_to_polar,
    needs_axis_swap,
    polar_to_frame_fit,
    supporting_points,
)
from .pgm import PgmParseError, read_pgm, write_pgm
from .solver import LmsFit, default_coverage, oracle_lms, solve_lms
from .synth import (
    GroundTruth,
    SyntheticSpec,
    bresenham,
    gen_synthetic,
    read_ground_truth,
    write_ground_truth,
)

__version__ = "0.1.0"
