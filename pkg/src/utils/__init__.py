from .cursor import ByteCursor

__all__: tuple[str, ...] = ("ByteCursor",)
