import pathlib

import numpy as np
import pytest

from src.config import Role
from src.exceptions import (
    TeleDriveDatasetError,
    TeleDriveDimensionError,
    TeleDriveFormatError,
    TeleDriveInsufficientHistoryError,
)
from src.preprocess import (
    ENVIRONMENT_DIM,
    PERCEPTION_DIM,
    STEP_DIM,
    ConditionWindow,
    WindowDataset,
    azimuth_bucket,
    build_environment_vector,
    build_window,
    decode_dataset,
    detect_obstacles,
    encode_dataset,
    from_cylindrical,
    normalize_control,
    normalize_state,
    observe,
    preprocess_episode,
    read_dataset,
    to_cylindrical,
    windows_from_steps,
    write_dataset,
)
from src.sim import RawControl, Terrain, VehicleState, lidar_scan

from .helpers import centerline_run


class TestNormalization:
    @pytest.mark.parametrize(
        ("control", "expected"),
        [
            (RawControl(), [0.5, 0.5]),
            (RawControl(steer=1.0, accel=1.0), [1.0, 1.0]),
            (RawControl(steer=-1.0, brake=1.0), [0.0, 0.0]),
            (RawControl(steer=0.5, accel=0.4, brake=0.2), [0.75, 0.6]),
        ],
    )
    def test_control(self, control: RawControl, expected: list[float]) -> None:
        assert normalize_control(control).tolist() == pytest.approx(expected)

    def test_state(self) -> None:
        assert normalize_state(VehicleState(yaw=90.0, speed=15.0)).tolist() == pytest.approx([0.5, 0.25, 0.0, 0.0])
        assert normalize_state(VehicleState(yaw=-90.0, roll=360.0, speed=45.0)).tolist() == pytest.approx(
            [1.0, 0.75, 0.0, 0.0]
        )

    def test_state_stays_below_one(self) -> None:
        assert np.all(normalize_state(VehicleState(yaw=359.9999999999999, pitch=-1e-18)) < 1.0)


class TestCylindrical:
    def test_examples(self) -> None:
        cyl = to_cylindrical(np.array([[0.0, 10.0, 0.0], [10.0, 0.0, 1.0], [-10.0, 0.0, -2.0]]))
        np.testing.assert_allclose(cyl, [[90.0, 10.0, 0.0], [0.0, 10.0, 1.0], [180.0, 10.0, -2.0]], atol=1e-12)

    def test_inverse(self) -> None:
        points = np.random.default_rng(2).uniform(-40.0, 40.0, size=(50, 3))
        points[:, 1] = np.abs(points[:, 1])
        np.testing.assert_allclose(from_cylindrical(to_cylindrical(points)), points, atol=1e-9)

    def test_buckets(self) -> None:
        assert azimuth_bucket(np.array([0.0, 0.99, 45.5, 179.2, 180.0])).tolist() == [0, 0, 45, 179, 179]


class TestObstacles:
    def test_steep_rise(self) -> None:
        cyl = np.array([[90.0, 10.0, -2.0], [90.3, 10.5, -1.0]])
        obstacles = detect_obstacles(cyl)
        assert obstacles.tolist() == [[90.3, 10.5, -1.0]]

    def test_exactly_threshold_is_not_an_obstacle(self) -> None:
        assert len(detect_obstacles(np.array([[90.0, 10.0, -2.0], [90.0, 11.0, -1.0]]))) == 0

    def test_vertical_rise(self) -> None:
        assert len(detect_obstacles(np.array([[30.0, 12.0, 0.0], [30.5, 12.0, 1.0]]))) == 1

    def test_different_buckets_are_independent(self) -> None:
        assert len(detect_obstacles(np.array([[89.5, 10.0, -2.0], [90.0, 10.5, 3.0]]))) == 0

    def test_order_independent(self) -> None:
        rng = np.random.default_rng(4)
        cyl = np.column_stack([rng.uniform(0, 180, 300), rng.uniform(1, 50, 300), rng.uniform(-2, 6, 300)])
        expected = detect_obstacles(cyl)
        np.testing.assert_array_equal(detect_obstacles(cyl[rng.permutation(300)]), expected)

    def test_too_few_points(self) -> None:
        assert detect_obstacles(np.zeros((1, 3))).shape == (0, 3)


class TestEnvironmentVector:
    def test_nearest_per_bucket(self) -> None:
        env = build_environment_vector(np.array([[45.5, 25.0, 0.0], [20.1, 30.0, 0.0], [20.7, 20.0, 1.0]]))
        assert env[45] == 0.5
        assert env[20] == 0.4
        assert np.count_nonzero(env < 1.0) == 2

    def test_clamped(self) -> None:
        assert build_environment_vector(np.array([[10.0, 80.0, 0.0]]))[10] == 1.0
        assert np.all(build_environment_vector(np.zeros((0, 3))) == 1.0)

    def test_corridor_walls(self, straight_terrain: Terrain) -> None:
        state = VehicleState(x=100.0)
        perception = observe(lidar_scan(straight_terrain, state), state)
        assert perception.shape == (PERCEPTION_DIM,)
        assert perception[0] == pytest.approx(0.2, abs=1e-4)
        assert perception[179] == pytest.approx(0.2, abs=1e-4)
        assert perception[90] == 1.0

    def test_walls_seen_in_every_bucket_within_range(self, straight_terrain: Terrain) -> None:
        state = VehicleState(x=100.0)
        env = observe(lidar_scan(straight_terrain, state), state)[:ENVIRONMENT_DIM]
        wall = 10.0 / np.abs(np.cos(np.radians(np.arange(ENVIRONMENT_DIM) + 0.5)))
        near, far = wall <= 45.0, wall > 50.0
        assert np.count_nonzero(near) > 100
        np.testing.assert_allclose(env[near], wall[near] / 50.0, rtol=1e-9)
        assert np.all(env[far] == 1.0)

    def test_values_in_unit_interval(self) -> None:
        rng = np.random.default_rng(8)
        for _ in range(25):
            points = rng.uniform(-60.0, 60.0, size=(int(rng.integers(0, 400)), 3))
            state = VehicleState(
                yaw=rng.uniform(-720, 720),
                roll=rng.uniform(-30, 30),
                pitch=rng.uniform(-30, 30),
                speed=rng.uniform(0, 40),
            )
            vector = observe(points, state)
            assert vector.shape == (PERCEPTION_DIM,)
            assert np.all((vector >= 0.0) & (vector <= 1.0))


@pytest.mark.slow
def test_randomized_ticks() -> None:
    rng = np.random.default_rng(10_000)
    for _ in range(10_000):
        count = int(rng.integers(0, 60))
        cylindrical = np.stack(
            [rng.uniform(0.0, 180.0, count), rng.uniform(0.5, 80.0, count), rng.uniform(-3.0, 8.0, count)], axis=1
        )
        free = np.setdiff1d(np.arange(ENVIRONMENT_DIM), azimuth_bucket(cylindrical[:, 0]))
        wall, ramp = rng.choice(free, size=2, replace=False)
        planted = np.array(
            [
                [wall + 0.5, 25.0, -2.0],
                [wall + 0.5, 25.0, 0.0],
                [ramp + 0.5, 10.0, 0.0],
                [ramp + 0.5, 11.0, 1.0],
            ]
        )
        env = build_environment_vector(detect_obstacles(np.concatenate([cylindrical, planted])))
        assert env[wall] == 0.5
        assert env[ramp] == 1.0
        untouched = np.setdiff1d(free, [wall, ramp])
        assert np.all(env[untouched] == 1.0)

        state = VehicleState(
            yaw=rng.uniform(-720.0, 720.0),
            roll=rng.uniform(-30.0, 30.0),
            pitch=rng.uniform(-30.0, 30.0),
            speed=rng.uniform(0.0, 40.0),
        )
        pedal = rng.uniform(-1.0, 1.0)
        control = RawControl(steer=rng.uniform(-1.0, 1.0), accel=max(pedal, 0.0), brake=max(-pedal, 0.0))
        vector = np.concatenate([observe(from_cylindrical(cylindrical), state), normalize_control(control)])
        assert np.all((vector >= 0.0) & (vector <= 1.0))


class TestWindows:
    def test_window_needs_history(self) -> None:
        episode = centerline_run(30.0, 10.0)
        with pytest.raises(TeleDriveInsufficientHistoryError):
            build_window(episode, 8)
        with pytest.raises(TeleDriveInsufficientHistoryError):
            build_window(episode, len(episode))

    def test_window_rows(self) -> None:
        episode = centerline_run(30.0, 10.0)
        steps = preprocess_episode(episode)
        window = build_window(episode, 12)
        np.testing.assert_array_equal(window.steps, steps[3:13])
        np.testing.assert_array_equal(window.current, steps[12])
        assert window.perception.shape == (10, PERCEPTION_DIM)
        assert window.control.shape == (10, 2)

    def test_sliding(self) -> None:
        steps = np.random.default_rng(0).uniform(size=(12, STEP_DIM))
        windows = windows_from_steps(steps)
        assert windows.shape == (3, 10, STEP_DIM)
        for k in range(3):
            np.testing.assert_array_equal(windows[k, -1], steps[k + 9])
        assert windows_from_steps(steps[:5]).shape == (0, 10, STEP_DIM)

    def test_bad_shapes(self) -> None:
        with pytest.raises(TeleDriveDimensionError):
            windows_from_steps(np.zeros((12, 7)))
        with pytest.raises(TeleDriveDimensionError):
            ConditionWindow(np.zeros((9, STEP_DIM)))


class TestDataset:
    @pytest.fixture()
    def dataset(self) -> WindowDataset:
        return WindowDataset(np.random.default_rng(1).uniform(size=(4, 10, STEP_DIM)), Role.INVERSE)

    def test_round_trip_stores_float32(self, tmp_path: pathlib.Path, dataset: WindowDataset) -> None:
        fingerprint = write_dataset(tmp_path / "inverse.tdg", dataset)
        restored, read_fingerprint = read_dataset(tmp_path / "inverse.tdg", expected_role=Role.INVERSE)
        assert fingerprint == read_fingerprint
        assert restored.role is Role.INVERSE
        np.testing.assert_array_equal(restored.windows, dataset.windows.astype(np.float32))

    def test_role_mismatch(self, dataset: WindowDataset) -> None:
        with pytest.raises(TeleDriveDatasetError):
            decode_dataset(encode_dataset(dataset), expected_role=Role.FORWARD)

    def test_step_dim_mismatch(self, dataset: WindowDataset) -> None:
        with pytest.raises(TeleDriveDatasetError):
            decode_dataset(encode_dataset(dataset), expected_step_dim=STEP_DIM + 1)

    def test_bad_magic(self, dataset: WindowDataset) -> None:
        with pytest.raises(TeleDriveFormatError):
            decode_dataset(b"XXXXXXXX" + encode_dataset(dataset)[8:])

    def test_truncated(self, dataset: WindowDataset) -> None:
        with pytest.raises(TeleDriveFormatError):
            decode_dataset(encode_dataset(dataset)[:-1])

    def test_empty(self) -> None:
        with pytest.raises(TeleDriveDatasetError):
            WindowDataset.concatenate([], Role.FORWARD)
