from .contraction import (
    ContractionSample,
    LambdaCurve,
    contraction_values,
    draw_pairs,
    lambda_curve,
    sample_contraction,
)
from .marginals import (
    CheckRow,
    EncoderPaths,
    bonferroni,
    encoder_paths,
    independence_chi2,
    independence_tests,
    marginal_tests,
    output_serial_test,
    serial_permutation_test,
)
from .report import COLUMNS, csv_text, row, write_csv
from .sweep import SweepRow, SweepTable, rate_sweep, sweep_row
from .tails import TailReport, TailRow, hl_tail_test, identity_map, square_map
from .trials import TrialSummary, run_trials, summarize
from .walk import (
    BucketRow,
    WalkTrace,
    partial_sums,
    saturation_test,
    submartingale_check,
    visit_counts,
    walk_trace,
)

__all__ = [
    "BucketRow", "COLUMNS", "CheckRow", "ContractionSample", "EncoderPaths", "LambdaCurve",
    "SweepRow", "SweepTable", "TailReport", "TailRow", "TrialSummary", "WalkTrace",
    "bonferroni", "contraction_values", "csv_text", "draw_pairs", "encoder_paths",
    "hl_tail_test", "identity_map", "independence_chi2", "independence_tests",
    "lambda_curve", "marginal_tests", "output_serial_test", "partial_sums", "rate_sweep",
    "row", "run_trials", "sample_contraction", "saturation_test", "serial_permutation_test",
    "square_map", "submartingale_check", "summarize", "sweep_row", "visit_counts",
    "walk_trace", "write_csv",
]
