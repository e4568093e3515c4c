import csv
import math
import pathlib

import numpy as np
import pytest
import yaml
from scipy import special, stats

from src.evaluation import (
    REPORT_FILES,
    DrivingMetrics,
    Metric,
    compare_populations,
    compute_metrics,
    correlate_sections,
    episode_section_metrics,
    linear_regression,
    pearson_r,
    regularized_beta,
    section_metrics,
    self_consistency,
    significance,
    student_t_cdf,
    student_t_two_sided,
    welch_t_test,
    write_report,
)
from src.exceptions import TeleDriveStatisticsError
from src.sim import Episode, Terrain

from .helpers import centerline_run, make_episode


def sectioned_run(speed_shift: float = 0.0, *, seed: int = 0) -> Episode:
    """One record per metre along the straight corridor; speed and weaving grow from section to section."""
    positions, speeds = [], []
    for x in range(901):
        section = min(x // 100, 8)
        amplitude = 0.5 + 0.1 * section
        positions.append((float(x), amplitude if x % 2 else -amplitude))
        speeds.append(5.0 + section + (0.5 if x % 2 else 0.0) * section + speed_shift)
    return make_episode(positions, speeds, seed=seed)


class TestMetrics:
    def test_speed_spread(self, straight_terrain: Terrain) -> None:
        metrics = compute_metrics(make_episode([(10.0, 0.0), (11.0, 0.0)], [8.0, 12.0]), straight_terrain)
        assert metrics.sds == 2.0
        assert metrics.avg_speed == 10.0
        assert metrics.sdlp == 0.0
        assert metrics.dct == pytest.approx(0.1)

    def test_lane_position_spread(self, straight_terrain: Terrain) -> None:
        metrics = compute_metrics(centerline_run(99.0, 10.0, offsets=[1.0, -1.0]), straight_terrain)
        assert metrics.sdlp == pytest.approx(1.0)
        assert metrics.sds == 0.0

    def test_completion_time(self, straight_terrain: Terrain) -> None:
        episode = centerline_run(900.0, 10.0)
        assert compute_metrics(episode, straight_terrain).dct == pytest.approx(90.0)
        sections = episode_section_metrics(episode, straight_terrain)
        assert len(sections) == 9
        assert [s.dct for s in sections] == pytest.approx([10.0] * 9, abs=0.11)
        assert sum(s.dct for s in sections) == pytest.approx(90.1)
        assert all(s.avg_speed == 10.0 for s in sections)

    def test_dct_ignores_start_tick(self, straight_terrain: Terrain) -> None:
        episode = centerline_run(100.0, 10.0, start_tick=40)
        assert compute_metrics(episode, straight_terrain).dct == pytest.approx(10.0)

    def test_untraversed_sections_are_missing(self, straight_terrain: Terrain) -> None:
        sections = section_metrics([centerline_run(150.0, 10.0)], straight_terrain)
        assert [s.is_missing for s in sections] == [False, False] + [True] * 7
        assert DrivingMetrics.missing().is_missing

    def test_section_means(self, straight_terrain: Terrain) -> None:
        slow, fast = centerline_run(150.0, 10.0), centerline_run(900.0, 20.0)
        sections = section_metrics([slow, fast], straight_terrain)
        assert sections[0].avg_speed == 15.0
        assert sections[5].avg_speed == 20.0

    def test_too_short(self, straight_terrain: Terrain) -> None:
        with pytest.raises(TeleDriveStatisticsError):
            compute_metrics(make_episode([(1.0, 0.0)], [3.0]), straight_terrain)

    def test_wrong_terrain(self, straight_terrain: Terrain) -> None:
        episode = make_episode([(1.0, 0.0), (2.0, 0.0)], [3.0, 3.0], terrain_id="terrain-9")
        with pytest.raises(TeleDriveStatisticsError):
            section_metrics([episode], straight_terrain)
        with pytest.raises(TeleDriveStatisticsError):
            section_metrics([], straight_terrain)

    def test_lookup_by_name(self) -> None:
        metrics = DrivingMetrics(1.0, 2.0, 3.0, 4.0)
        assert metrics["avg_speed"] == metrics[Metric.AVG_SPEED] == 3.0
        assert metrics.as_dict() == {"sdlp": 1.0, "sds": 2.0, "avg_speed": 3.0, "dct": 4.0}


class TestStatistics:
    def test_pearson(self) -> None:
        assert pearson_r([1, 2, 3, 4], [2, 1, 4, 3]) == pytest.approx(0.6)
        assert pearson_r([1, 2, 3], [3, 2, 1]) == -1.0

    def test_regression(self) -> None:
        assert linear_regression([0, 1, 2, 3], [1, 4, 7, 10]) == pytest.approx((3.0, 1.0))

    @pytest.mark.parametrize(
        ("xs", "ys"), [([1, 1, 1], [1, 2, 3]), ([1], [2]), ([1, 2], [1, 2, 3]), ([1, float("nan")], [1, 2])]
    )
    def test_undefined_correlation(self, xs: list[float], ys: list[float]) -> None:
        with pytest.raises(TeleDriveStatisticsError):
            pearson_r(xs, ys)

    def test_pearson_ignores_positive_affine_maps(self) -> None:
        rng = np.random.default_rng(21)
        xs, ys = rng.normal(size=20), rng.normal(size=20) + 0.3 * np.arange(20)
        reference = pearson_r(xs, ys)
        for scale in (1e-3, 0.5, 3.0, 1e3):
            for shift in (-50.0, 0.0, 7.5):
                assert pearson_r(scale * xs + shift, ys) == pytest.approx(reference, abs=1e-9)
                assert pearson_r(xs, scale * ys + shift) == pytest.approx(reference, abs=1e-9)
        assert pearson_r(-xs, ys) == pytest.approx(-reference, abs=1e-9)

    def test_welch_p_falls_as_means_separate(self) -> None:
        rng = np.random.default_rng(22)
        a = rng.normal(0.0, 1.0, size=12)
        b = rng.normal(0.0, 2.0, size=7)
        b = b - b.mean() + a.mean()
        shifts = np.linspace(0.0, 6.0, 25)
        ps = np.array([welch_t_test(a, b + shift).p for shift in shifts])
        assert ps[0] == pytest.approx(1.0)
        assert np.all((ps >= 0.0) & (ps <= 1.0))
        assert np.all(np.diff(ps) < 0.0)
        for shift in shifts:
            assert welch_t_test(a, b - shift).p == pytest.approx(welch_t_test(a, b + shift).p, rel=1e-9)

    def test_welch_example(self) -> None:
        result = welch_t_test([1, 2, 3, 4, 5], [2, 3, 4, 5, 6])
        assert result.t == pytest.approx(-1.0)
        assert result.df == pytest.approx(8.0)
        assert result.p == pytest.approx(0.3466, abs=1e-4)
        assert result.sd_a == pytest.approx(math.sqrt(2.5))

    def test_welch_constant_samples(self) -> None:
        same = welch_t_test([1.0, 1.0], [1.0, 1.0, 1.0])
        assert (same.t, same.df, same.p) == (0.0, 3.0, 1.0)
        apart = welch_t_test([1.0, 1.0], [2.0, 2.0])
        assert (apart.t, apart.p) == (-math.inf, 0.0)

    def test_welch_needs_two_samples(self) -> None:
        with pytest.raises(TeleDriveStatisticsError):
            welch_t_test([1.0], [1.0, 2.0])

    def test_welch_matches_scipy(self) -> None:
        rng = np.random.default_rng(12)
        for _ in range(25):
            a = rng.normal(rng.uniform(-5, 5), rng.uniform(0.1, 4), size=int(rng.integers(2, 30)))
            b = rng.normal(rng.uniform(-5, 5), rng.uniform(0.1, 4), size=int(rng.integers(2, 30)))
            ours = welch_t_test(a, b)
            reference = stats.ttest_ind(a, b, equal_var=False)
            assert ours.t == pytest.approx(float(reference.statistic), rel=1e-9)
            assert ours.p == pytest.approx(float(reference.pvalue), rel=1e-6, abs=1e-12)

    def test_incomplete_beta_matches_scipy(self) -> None:
        rng = np.random.default_rng(13)
        for _ in range(40):
            x, a, b = rng.uniform(0, 1), rng.uniform(0.05, 40), rng.uniform(0.05, 40)
            assert regularized_beta(x, a, b) == pytest.approx(float(special.betainc(a, b, x)), rel=1e-9, abs=1e-14)
        assert regularized_beta(0.0, 2.0, 3.0) == 0.0
        assert regularized_beta(1.0, 2.0, 3.0) == 1.0

    def test_student_t(self) -> None:
        for df in range(1, 31):
            assert student_t_cdf(0.0, df) == 0.5
            assert student_t_two_sided(0.0, df) == 1.0
        for t_value, df in [(2.0, 3.0), (-1.3, 7.5), (4.2, 1.0), (0.7, 120.0)]:
            assert student_t_cdf(t_value, df) == pytest.approx(float(stats.t.cdf(t_value, df)), rel=1e-9)
        assert student_t_two_sided(math.inf, 4.0) == 0.0

    @pytest.mark.parametrize(("p", "stars"), [(0.0001, "***"), (0.001, "**"), (0.01, "*"), (0.05, ""), (0.5, "")])
    def test_significance(self, p: float, stars: str) -> None:
        assert significance(p) == stars


class TestReport:
    @pytest.fixture(scope="class")
    def runs(self) -> list[Episode]:
        return [sectioned_run(seed=1), sectioned_run(1.0, seed=2)]

    def test_self_comparison(self, straight_terrain: Terrain, runs: list[Episode]) -> None:
        report = compare_populations(runs, runs, straight_terrain)
        for metric in Metric:
            correlation = report.sections.correlations[metric]
            assert correlation.r == pytest.approx(1.0)
            assert correlation.slope == pytest.approx(1.0)
            assert correlation.intercept == pytest.approx(0.0, abs=1e-9)
            assert correlation.sections == 9
            assert report.tests[metric].t == 0.0
            assert report.tests[metric].p == 1.0

    def test_split_half(self, straight_terrain: Terrain, runs: list[Episode]) -> None:
        consistency = self_consistency(runs, straight_terrain)
        assert consistency[Metric.AVG_SPEED].r == pytest.approx(1.0)
        assert consistency[Metric.AVG_SPEED].intercept == pytest.approx(1.0)
        with pytest.raises(TeleDriveStatisticsError):
            self_consistency(runs[:1], straight_terrain)

    def test_constant_sections_are_undefined(self, straight_terrain: Terrain) -> None:
        flat = section_metrics([centerline_run(900.0, 10.0)], straight_terrain)
        correlations = correlate_sections(flat, flat)
        assert math.isnan(correlations[Metric.AVG_SPEED].r)
        assert correlations[Metric.AVG_SPEED].sections == 9

    def test_unfinished_runs_are_left_out(self, straight_terrain: Terrain, runs: list[Episode]) -> None:
        stalled = sectioned_run(20.0, seed=3)
        stalled.completed = False
        report = compare_populations([*runs, stalled], runs, straight_terrain)
        assert (report.driver_episodes, report.driver_incomplete) == (2, 1)
        assert (report.model_episodes, report.model_incomplete) == (2, 0)
        assert all(report.tests[metric].p == 1.0 for metric in Metric)

    def test_population_without_finishers_is_kept(self, straight_terrain: Terrain) -> None:
        stalled = [sectioned_run(seed=4), sectioned_run(1.0, seed=5)]
        for episode in stalled:
            episode.completed = False
        report = compare_populations(stalled, stalled, straight_terrain)
        assert (report.driver_episodes, report.driver_incomplete) == (2, 0)

    def test_empty_population(self, straight_terrain: Terrain, runs: list[Episode]) -> None:
        with pytest.raises(TeleDriveStatisticsError):
            compare_populations(runs, [], straight_terrain)

    def test_files(self, tmp_path: pathlib.Path, straight_terrain: Terrain, runs: list[Episode]) -> None:
        paths = write_report(compare_populations(runs, runs, straight_terrain), tmp_path)
        assert [path.name for path in paths] == list(REPORT_FILES)
        with paths[0].open(newline="") as stream:
            assert len(list(csv.reader(stream))) == 1 + 4 * 9
        with paths[2].open(newline="") as stream:
            rows = list(csv.DictReader(stream))
        assert [row["metric"] for row in rows] == [metric.value for metric in Metric]
        assert all(row["significance"] == "" for row in rows)
        summary = yaml.safe_load(paths[4].read_text())
        assert summary["terrain_id"] == "terrain-1"
        assert summary["traversed_sections"] == {"drivers": 9, "model": 9}
        assert summary["drivers"]["dct"]["mean"] == pytest.approx(90.0)

    def test_unfinished_count_in_summary(
        self, tmp_path: pathlib.Path, straight_terrain: Terrain, runs: list[Episode]
    ) -> None:
        stalled = sectioned_run(seed=6)
        stalled.completed = False
        paths = write_report(compare_populations(runs, [*runs, stalled, stalled], straight_terrain), tmp_path)
        summary = yaml.safe_load(paths[4].read_text())
        assert summary["model_episodes"] == 2
        assert summary["excluded_incomplete"] == {"drivers": 0, "model": 2}
