import math
import pathlib

import numpy as np
import pytest

from src.config import Role, TrainingMode
from src.exceptions import TeleDriveDimensionError, TeleDriveFileNotFoundError, TeleDriveRoleError
from src.model import CvaeConfig, CvaeModel, load_model, save_model, sidecar_path
from src.numeric import Tensor, backward
from src.preprocess import PERCEPTION_DIM, STEP_DIM


def small(role: Role, mode: TrainingMode = TrainingMode.PAPER, **kwargs) -> CvaeModel:
    config = CvaeConfig(role=role, linear_width=4, hidden_size=4, mode=mode, **kwargs)
    return CvaeModel.initialize(config, np.random.default_rng(0))


@pytest.fixture(scope="module")
def windows() -> np.ndarray:
    return np.random.default_rng(6).uniform(size=(3, 10, STEP_DIM))


class TestReparameterize:
    def test_standard(self) -> None:
        z = small(Role.INVERSE).reparameterize(Tensor([[1.0]]), Tensor([[math.log(4.0)]]), np.array([[0.5]]))
        assert z.item() == pytest.approx(2.0)

    def test_literal_variance_scaling(self) -> None:
        model = small(Role.INVERSE, literal_eq4=True)
        z = model.reparameterize(Tensor([[1.0]]), Tensor([[math.log(4.0)]]), np.array([[0.5]]))
        assert z.item() == pytest.approx(3.0)

    def test_shape_mismatch(self) -> None:
        with pytest.raises(TeleDriveDimensionError):
            small(Role.INVERSE).reparameterize(Tensor([[0.0, 0.0]]), Tensor([[0.0, 0.0]]), np.zeros((1, 3)))


class TestForward:
    @pytest.mark.parametrize(("role", "width"), [(Role.FORWARD, PERCEPTION_DIM), (Role.INVERSE, 2)])
    def test_generated_width(self, windows: np.ndarray, role: Role, width: int) -> None:
        model = small(role)
        single = model.generate(windows[0], np.random.default_rng(1))
        batch = model.generate(windows, np.random.default_rng(1))
        assert single.shape == (width,)
        assert batch.shape == (3, width)
        assert np.all((batch >= 0.0) & (batch <= 1.0))

    def test_deterministic(self, windows: np.ndarray) -> None:
        model = small(Role.INVERSE)
        first = model.generate(windows, np.random.default_rng(9))
        np.testing.assert_array_equal(first, model.generate(windows, np.random.default_rng(9)))

    @pytest.mark.parametrize("mode", list(TrainingMode))
    def test_current_slice_is_masked(self, windows: np.ndarray, mode: TrainingMode) -> None:
        model = small(Role.INVERSE, mode)
        changed = windows.copy()
        changed[:, -1, PERCEPTION_DIM:] = 1.0 - changed[:, -1, PERCEPTION_DIM:]
        np.testing.assert_array_equal(
            model.generate(windows, np.random.default_rng(2)), model.generate(changed, np.random.default_rng(2))
        )

    def test_assembled_input(self, windows: np.ndarray) -> None:
        model = small(Role.INVERSE)
        x = model.assemble_input(windows, np.array([0.25, 0.75]))
        assert x.shape == (3, 10, STEP_DIM + 2)
        assert np.all(x.data[:, -1, PERCEPTION_DIM:STEP_DIM] == 0.0)
        assert np.all(x.data[:, -1, STEP_DIM:] == [0.25, 0.75])
        assert np.all(x.data[:, :-1, STEP_DIM:] == 0.0)

    def test_bad_window(self) -> None:
        with pytest.raises(TeleDriveDimensionError):
            small(Role.FORWARD).generate(np.zeros((9, STEP_DIM)), np.random.default_rng(0))


class TestLoss:
    def test_zero_parameters(self) -> None:
        model = small(Role.INVERSE)
        model.params.assign({name: np.zeros(tensor.shape) for name, tensor in model.params.items()})
        windows = np.full((2, 10, STEP_DIM), 0.5)
        terms = model.loss(windows, rng=np.random.default_rng(0))
        assert terms.reconstruction == 0.0
        assert terms.kl == 0.0
        assert terms.total.item() == 0.0

    def test_only_current_step_counts(self, windows: np.ndarray) -> None:
        model = small(Role.INVERSE)
        eps = np.random.default_rng(3).standard_normal((3, 2))
        noise = np.random.default_rng(4).standard_normal((3, 2))
        target = np.random.default_rng(5).uniform(size=(3, 10, 2))
        full = model.loss(windows, target, eps=eps, noise=noise, trainable=False)
        current = model.loss(windows, target[:, -1, :], eps=eps, noise=noise, trainable=False)
        assert full.total.item() == current.total.item()

    def test_beta_weights_kl(self, windows: np.ndarray) -> None:
        model = small(Role.INVERSE)
        eps, noise = np.zeros((3, 2)), np.zeros((3, 2))
        plain = model.loss(windows, eps=eps, noise=noise, beta=0.0, trainable=False)
        weighted = model.loss(windows, eps=eps, noise=noise, beta=2.0, trainable=False)
        assert weighted.total.item() == pytest.approx(plain.reconstruction + 2.0 * weighted.kl)

    def test_every_parameter_gets_a_gradient(self, windows: np.ndarray) -> None:
        model = small(Role.FORWARD)
        backward(model.loss(windows, rng=np.random.default_rng(0)).total)
        grads = model.params.gradients()
        assert list(grads) == list(model.params)
        assert all(np.all(np.isfinite(grad)) for grad in grads.values())

    def test_frozen_loss_has_no_tape(self, windows: np.ndarray) -> None:
        terms = small(Role.FORWARD).loss(windows, rng=np.random.default_rng(0), trainable=False)
        assert not terms.total.requires_grad

    def test_target_shape(self, windows: np.ndarray) -> None:
        with pytest.raises(TeleDriveDimensionError):
            small(Role.INVERSE).loss(windows, np.zeros((3, 5)))


class TestStore:
    def test_round_trip(self, tmp_path: pathlib.Path, windows: np.ndarray) -> None:
        model = small(Role.INVERSE, TrainingMode.STANDARD_CVAE)
        path = tmp_path / "inverse.ckpt"
        save_model(path, model, best_epoch=3)
        loaded, state, sidecar = load_model(path, expected_role=Role.INVERSE)
        assert state is None
        assert sidecar.best_epoch == 3
        assert sidecar.parameter_count == model.params.size
        assert loaded.config == model.config
        assert loaded.params == model.params
        np.testing.assert_array_equal(
            loaded.generate(windows, np.random.default_rng(0)), model.generate(windows, np.random.default_rng(0))
        )

    def test_wrong_role(self, tmp_path: pathlib.Path) -> None:
        path = tmp_path / "forward.ckpt"
        save_model(path, small(Role.FORWARD))
        with pytest.raises(TeleDriveRoleError):
            load_model(path, expected_role=Role.INVERSE)
        with pytest.raises(TeleDriveRoleError):
            load_model(path)[0].expect_role(Role.INVERSE)

    def test_missing_sidecar(self, tmp_path: pathlib.Path) -> None:
        path = tmp_path / "inverse.ckpt"
        save_model(path, small(Role.INVERSE))
        sidecar_path(path).unlink()
        with pytest.raises(TeleDriveFileNotFoundError):
            load_model(path)
