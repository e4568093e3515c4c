from .cli import TeleDrive, run_command

__all__: tuple[str, ...] = ("TeleDrive", "run_command")
