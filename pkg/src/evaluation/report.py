import csv
import dataclasses
import math
import pathlib
import typing as t

import yaml

from src.exceptions import TeleDriveStatisticsError
from src.logger import Logger
from src.sim import Episode, Terrain

from .metrics import DrivingMetrics, Metric, compute_metrics, section_metrics
from .stats import WelchResult, linear_regression, pearson_r, welch_t_test

__all__: tuple[str, ...] = (
    "REPORT_FILES",
    "Correlation",
    "SectionReport",
    "ComparisonReport",
    "significance",
    "correlate_sections",
    "compare_populations",
    "self_consistency",
    "write_report",
)

REPORT_FILES: tuple[str, ...] = (
    "sections.csv",
    "correlation.csv",
    "ttest.csv",
    "self_consistency.csv",
    "report.yaml",
)

CONVENTIONS: dict[str, str] = {
    "sd": "population standard deviation (ddof = 0) for sdlp and sds",
    "p_value": "two-sided Welch's t-test, Welch-Satterthwaite degrees of freedom",
    "section_dct": "seconds spent in the section (in-section records times 0.1 s)",
    "section_avg_speed": "mean speed over in-section records",
    "sections": "equal arc-length divisions of the centerline; untraversed sections are excluded",
}


@dataclasses.dataclass(frozen=True)
class Correlation:
    slope: float
    intercept: float
    r: float
    sections: int

    @classmethod
    def undefined(cls, sections: int) -> "Correlation":
        return cls(math.nan, math.nan, math.nan, sections)


@dataclasses.dataclass(frozen=True)
class SectionReport:
    drivers: list[DrivingMetrics]
    model: list[DrivingMetrics]
    correlations: dict[Metric, Correlation]

    @property
    def section_count(self) -> int:
        return len(self.drivers)


@dataclasses.dataclass(frozen=True)
class ComparisonReport:
    terrain_id: str
    sections: SectionReport
    tests: dict[Metric, WelchResult]
    self_consistency: dict[Metric, Correlation]
    driver_episodes: int
    model_episodes: int
    driver_incomplete: int = 0
    model_incomplete: int = 0


def significance(p: float) -> str:
    if p < 0.0005:
        return "***"
    if p < 0.005:
        return "**"
    if p < 0.05:
        return "*"
    return ""


def _correlate(xs: list[float], ys: list[float], metric: Metric, logger: t.Optional[Logger]) -> Correlation:
    try:
        slope, intercept = linear_regression(xs, ys)
        return Correlation(slope, intercept, pearson_r(xs, ys), len(xs))
    except TeleDriveStatisticsError as e:
        if logger is not None:
            logger.warning(f"{metric}: correlation left undefined, {e.message}")
        return Correlation.undefined(len(xs))


def correlate_sections(
    xs: t.Sequence[DrivingMetrics],
    ys: t.Sequence[DrivingMetrics],
    *,
    logger: t.Optional[Logger] = None,
) -> dict[Metric, Correlation]:
    """Regression and Pearson r of section means per metric, over the sections both sides traversed."""
    pairs = [(x, y) for x, y in zip(xs, ys) if not (x.is_missing or y.is_missing)]
    return {
        metric: _correlate([x[metric] for x, _ in pairs], [y[metric] for _, y in pairs], metric, logger)
        for metric in Metric
    }


def self_consistency(
    episodes: t.Sequence[Episode], terrain: Terrain, *, logger: t.Optional[Logger] = None
) -> dict[Metric, Correlation]:
    """Section correlation between the even and the odd runs of one population."""
    even, odd = list(episodes[0::2]), list(episodes[1::2])
    if not even or not odd:
        raise TeleDriveStatisticsError(f"split-half consistency needs at least 2 episodes, got {len(episodes)}.")
    return correlate_sections(section_metrics(even, terrain), section_metrics(odd, terrain), logger=logger)


def _completed(episodes: t.Sequence[Episode], label: str, logger: t.Optional[Logger]) -> tuple[list[Episode], int]:
    finished = [episode for episode in episodes if episode.completed]
    if not finished:
        if episodes and logger is not None:
            logger.warning(f"no {label} episode finished, comparing all {len(episodes)} of them")
        return list(episodes), 0
    if logger is not None and len(finished) < len(episodes):
        logger.warning(f"leaving out {len(episodes) - len(finished)} {label} episode(s) that did not finish")
    return finished, len(episodes) - len(finished)


def compare_populations(
    driver_episodes: t.Sequence[Episode],
    model_episodes: t.Sequence[Episode],
    terrain: Terrain,
    *,
    logger: t.Optional[Logger] = None,
) -> ComparisonReport:
    """
    Section scatter inputs, per-metric regression and whole-episode Welch tests.

    Drivers are the x axis of every regression and sample ``a`` of every test.
    Only completed episodes are compared and the rest are counted in the report.
    A population in which no episode finished is compared whole.
    """
    driver_episodes, driver_incomplete = _completed(driver_episodes, "driver", logger)
    model_episodes, model_incomplete = _completed(model_episodes, "model", logger)
    if not driver_episodes or not model_episodes:
        raise TeleDriveStatisticsError(
            f"both populations must be nonempty, got {len(driver_episodes)} driver and "
            f"{len(model_episodes)} model episodes."
        )
    drivers = section_metrics(driver_episodes, terrain)
    model = section_metrics(model_episodes, terrain)
    correlations = correlate_sections(drivers, model, logger=logger)
    sections = SectionReport(drivers=drivers, model=model, correlations=correlations)
    driver_totals = [compute_metrics(e, terrain) for e in driver_episodes]
    model_totals = [compute_metrics(e, terrain) for e in model_episodes]
    tests = {
        metric: welch_t_test([m[metric] for m in driver_totals], [m[metric] for m in model_totals])
        for metric in Metric
    }
    consistency = (
        self_consistency(driver_episodes, terrain, logger=logger)
        if len(driver_episodes) >= 2
        else {metric: Correlation.undefined(0) for metric in Metric}
    )
    if logger is not None:
        for metric in Metric:
            correlation, test = sections.correlations[metric], tests[metric]
            logger.info(f"{metric}: r={correlation.r:.3f} t={test.t:.3f} df={test.df:.1f} p={test.p:.4f}")
    return ComparisonReport(
        terrain_id=terrain.terrain_id,
        sections=sections,
        tests=tests,
        self_consistency=consistency,
        driver_episodes=len(driver_episodes),
        model_episodes=len(model_episodes),
        driver_incomplete=driver_incomplete,
        model_incomplete=model_incomplete,
    )


def _rows(path: pathlib.Path, header: t.Sequence[str], rows: t.Iterable[t.Sequence[t.Any]]) -> None:
    with path.open("w", newline="", encoding="utf-8") as stream:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(value) if isinstance(value, float) else value for value in row])


def write_report(report: ComparisonReport, out_dir: pathlib.Path) -> list[pathlib.Path]:
    """Write every report file under ``out_dir``; returns their paths in ``REPORT_FILES`` order."""
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = [out_dir / name for name in REPORT_FILES]
    sections = report.sections
    _rows(
        paths[0],
        ("metric", "section", "mean_drivers", "mean_model"),
        (
            (metric.value, index, sections.drivers[index][metric], sections.model[index][metric])
            for metric in Metric
            for index in range(sections.section_count)
        ),
    )
    _rows(
        paths[1],
        ("metric", "slope", "intercept", "r"),
        ((m.value, c.slope, c.intercept, c.r) for m, c in sections.correlations.items()),
    )
    _rows(
        paths[2],
        ("metric", "t", "df", "p", "mean_a", "sd_a", "mean_b", "sd_b", "significance"),
        (
            (m.value, w.t, w.df, w.p, w.mean_a, w.sd_a, w.mean_b, w.sd_b, significance(w.p))
            for m, w in report.tests.items()
        ),
    )
    _rows(
        paths[3],
        ("metric", "slope", "intercept", "r", "sections"),
        ((m.value, c.slope, c.intercept, c.r, c.sections) for m, c in report.self_consistency.items()),
    )
    header = {
        "terrain_id": report.terrain_id,
        "section_count": sections.section_count,
        "driver_episodes": report.driver_episodes,
        "model_episodes": report.model_episodes,
        "excluded_incomplete": {"drivers": report.driver_incomplete, "model": report.model_incomplete},
        "conventions": CONVENTIONS,
        "drivers": {m.value: {"mean": w.mean_a, "sample_sd": w.sd_a} for m, w in report.tests.items()},
        "model": {m.value: {"mean": w.mean_b, "sample_sd": w.sd_b} for m, w in report.tests.items()},
        "traversed_sections": {
            "drivers": sum(not m.is_missing for m in sections.drivers),
            "model": sum(not m.is_missing for m in sections.model),
        },
    }
    paths[4].write_text(yaml.safe_dump(header, sort_keys=False), encoding="utf-8")
    return paths
