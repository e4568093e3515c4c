import dataclasses
import zlib

import numpy as np

__all__: tuple[str, ...] = ("SeedTree",)


@dataclasses.dataclass(frozen=True)
class SeedTree:
    """
    Expands one root seed into independent per-component random streams.

    Each stream is addressed by a component name and an integer index, so adding
    a component or an extra episode never shifts the numbers any other stream sees.
    """

    root: int

    @staticmethod
    def _component_key(component: str) -> int:
        return zlib.crc32(component.encode("utf-8"))

    def sequence(self, component: str, index: int = 0) -> np.random.SeedSequence:
        """The seed sequence for one (component, index) pair."""
        return np.random.SeedSequence(entropy=self.root, spawn_key=(self._component_key(component), index))

    def rng(self, component: str, index: int = 0) -> np.random.Generator:
        """A fresh PCG64 generator for one (component, index) pair."""
        return np.random.Generator(np.random.PCG64(self.sequence(component, index)))

    def seed(self, component: str, index: int = 0) -> int:
        """A 32-bit integer seed for components that store their seed in files."""
        return int(self.sequence(component, index).generate_state(1, dtype=np.uint32)[0])
