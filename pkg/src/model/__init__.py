from .cvae import CvaeConfig, CvaeModel, LossTerms
from .store import ModelSidecar, load_model, save_model, sidecar_path

__all__: tuple[str, ...] = (
    "CvaeConfig",
    "CvaeModel",
    "LossTerms",
    "ModelSidecar",
    "sidecar_path",
    "save_model",
    "load_model",
)
