import enum

__all__: tuple[str, ...] = (
    "TeleDriveErrorTypes",
    "TeleDriveException",
    "TeleDriveDimensionError",
    "TeleDriveTapeError",
    "TeleDriveNonFiniteError",
    "TeleDriveTerrainError",
    "TeleDriveOutOfRangeError",
    "TeleDriveInsufficientHistoryError",
    "TeleDriveDatasetError",
    "TeleDriveRoleError",
    "TeleDriveFormatError",
    "TeleDriveConfigError",
    "TeleDriveStatisticsError",
    "TeleDriveFileNotFoundError",
)


class TeleDriveErrorTypes(enum.IntEnum):
    EX_OK = 0
    EX_USAGE = 64
    EX_DATAERR = 65
    EX_NOINPUT = 66
    EX_SOFTWARE = 70
    EX_IOERR = 74
    EX_CONFIG = 78


class TeleDriveException(Exception):
    """Base class for exceptions in this package."""

    def __init__(self, message: str, error_type: TeleDriveErrorTypes = TeleDriveErrorTypes.EX_SOFTWARE) -> None:
        self.message = message
        self.error_type = error_type
        super().__init__(self.message)

    def __str__(self) -> str:
        return f"{self.error_type.name}: {self.message}"


class TeleDriveDimensionError(TeleDriveException, ValueError):
    """Exception raised when tensor or vector shapes do not line up."""

    def __init__(self, message: str, error_type: TeleDriveErrorTypes = TeleDriveErrorTypes.EX_DATAERR) -> None:
        super().__init__(message, error_type)

    @classmethod
    def mismatch(cls, what: str, left: tuple[int, ...], right: tuple[int, ...]) -> "TeleDriveDimensionError":
        return cls(f"{what}: shape {left} is incompatible with shape {right}.")


class TeleDriveTapeError(TeleDriveException, RuntimeError):
    """Exception raised when a gradient tape is reused after it was consumed."""

    def __init__(self, message: str, error_type: TeleDriveErrorTypes = TeleDriveErrorTypes.EX_USAGE) -> None:
        super().__init__(message, error_type)


class TeleDriveNonFiniteError(TeleDriveException, ArithmeticError):
    """Exception raised when a loss, gradient or generated vector stops being finite."""

    def __init__(self, message: str, error_type: TeleDriveErrorTypes = TeleDriveErrorTypes.EX_SOFTWARE) -> None:
        super().__init__(message, error_type)


class TeleDriveTerrainError(TeleDriveException):
    """Exception raised for terrain configurations that cannot be generated."""

    def __init__(self, message: str, error_type: TeleDriveErrorTypes = TeleDriveErrorTypes.EX_DATAERR) -> None:
        super().__init__(message, error_type)


class TeleDriveOutOfRangeError(TeleDriveException, IndexError):
    """Exception raised for positions or indices outside the terrain or episode."""

    def __init__(self, message: str, error_type: TeleDriveErrorTypes = TeleDriveErrorTypes.EX_DATAERR) -> None:
        super().__init__(message, error_type)


class TeleDriveInsufficientHistoryError(TeleDriveOutOfRangeError):
    """Exception raised when a condition window would reach before the first tick."""


class TeleDriveDatasetError(TeleDriveException):
    """Exception raised for empty or inconsistent datasets."""

    def __init__(self, message: str, error_type: TeleDriveErrorTypes = TeleDriveErrorTypes.EX_DATAERR) -> None:
        super().__init__(message, error_type)


class TeleDriveRoleError(TeleDriveException):
    """Exception raised when a model of the wrong role is supplied."""

    def __init__(self, message: str, error_type: TeleDriveErrorTypes = TeleDriveErrorTypes.EX_USAGE) -> None:
        super().__init__(message, error_type)


class TeleDriveFormatError(TeleDriveException):
    """Exception raised for files with a wrong magic, version or layout."""

    def __init__(self, message: str, error_type: TeleDriveErrorTypes = TeleDriveErrorTypes.EX_DATAERR) -> None:
        super().__init__(message, error_type)


class TeleDriveConfigError(TeleDriveException):
    """Exception raised for unreadable or invalid configuration."""

    def __init__(self, message: str, error_type: TeleDriveErrorTypes = TeleDriveErrorTypes.EX_CONFIG) -> None:
        super().__init__(message, error_type)


class TeleDriveStatisticsError(TeleDriveException, ValueError):
    """Exception raised for statistics that are undefined on the given samples."""

    def __init__(self, message: str, error_type: TeleDriveErrorTypes = TeleDriveErrorTypes.EX_DATAERR) -> None:
        super().__init__(message, error_type)


class TeleDriveFileNotFoundError(TeleDriveException, FileNotFoundError):
    """Exception raised for missing input files."""

    def __init__(self, message: str, error_type: TeleDriveErrorTypes = TeleDriveErrorTypes.EX_NOINPUT) -> None:
        super().__init__(message, error_type)
