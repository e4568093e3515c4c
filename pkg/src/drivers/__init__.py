from .controllers import lookahead_point, pure_pursuit_steer, speed_control, target_speed
from .scripted import Intent, ScriptedDriver, act, build_population, lag_alpha, noisy_intent

__all__: tuple[str, ...] = (
    "lookahead_point",
    "pure_pursuit_steer",
    "target_speed",
    "speed_control",
    "Intent",
    "noisy_intent",
    "lag_alpha",
    "act",
    "ScriptedDriver",
    "build_population",
)
