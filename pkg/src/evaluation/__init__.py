from .metrics import DrivingMetrics, Metric, compute_metrics, episode_section_metrics, section_metrics
from .report import (
    REPORT_FILES,
    ComparisonReport,
    Correlation,
    SectionReport,
    compare_populations,
    correlate_sections,
    self_consistency,
    significance,
    write_report,
)
from .stats import (
    WelchResult,
    linear_regression,
    pearson_r,
    regularized_beta,
    student_t_cdf,
    student_t_two_sided,
    welch_t_test,
)

__all__: tuple[str, ...] = (
    "Metric",
    "DrivingMetrics",
    "compute_metrics",
    "episode_section_metrics",
    "section_metrics",
    "REPORT_FILES",
    "Correlation",
    "SectionReport",
    "ComparisonReport",
    "significance",
    "correlate_sections",
    "compare_populations",
    "self_consistency",
    "write_report",
    "WelchResult",
    "regularized_beta",
    "student_t_cdf",
    "student_t_two_sided",
    "pearson_r",
    "linear_regression",
    "welch_t_test",
)
