from .dataset import (
    DATASET_MAGIC,
    DATASET_VERSION,
    WindowDataset,
    decode_dataset,
    encode_dataset,
    read_dataset,
    write_dataset,
)
from .vectors import (
    CONTROL_DIM,
    ENVIRONMENT_DIM,
    PERCEPTION_DIM,
    STATE_DIM,
    STEP_DIM,
    azimuth_bucket,
    build_environment_vector,
    detect_obstacles,
    from_cylindrical,
    normalize_control,
    normalize_state,
    observe,
    perception_vector,
    step_vector,
    to_cylindrical,
)
from .windows import WINDOW_LENGTH, ConditionWindow, build_window, preprocess_episode, windows_from_steps

__all__: tuple[str, ...] = (
    "ENVIRONMENT_DIM",
    "STATE_DIM",
    "PERCEPTION_DIM",
    "CONTROL_DIM",
    "STEP_DIM",
    "normalize_control",
    "normalize_state",
    "to_cylindrical",
    "from_cylindrical",
    "azimuth_bucket",
    "detect_obstacles",
    "build_environment_vector",
    "observe",
    "perception_vector",
    "step_vector",
    "WINDOW_LENGTH",
    "ConditionWindow",
    "preprocess_episode",
    "build_window",
    "windows_from_steps",
    "DATASET_MAGIC",
    "DATASET_VERSION",
    "WindowDataset",
    "encode_dataset",
    "decode_dataset",
    "write_dataset",
    "read_dataset",
)
