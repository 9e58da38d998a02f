"""Exception hierarchy.

Every error raised by the library derives from :class:`PspsError`.  The CLI
maps the three families below onto its exit codes (config 2, data 3,
solver 4).
"""


class PspsError(Exception):
    """Base class for all library errors."""


class ConfigError(PspsError):
    """Invalid study configuration."""


class DataError(PspsError, ValueError):
    """Input data is malformed or inconsistent."""


class SchemaError(DataError):
    """A record in an input file violates the file schema."""


class DanglingReferenceError(DataError):
    """A record references a bus (or other entity) that does not exist."""


class DuplicateError(DataError):
    """The same key appears more than once in an input file."""


class ValidationError(DataError):
    """A value is outside its permitted domain."""


class RasterFormatError(DataError):
    """An ASCII grid file could not be parsed."""


class BoundsError(DataError):
    """A line geometry leaves the raster extent."""


class GeometryError(DataError):
    """Rasters or pixel sets disagree on grid geometry."""


class InsufficientDataError(DataError):
    """Not enough observations to compute a statistic."""


class SolverError(PspsError):
    """The optimization backend failed."""


class InternalSolverError(SolverError):
    """The solver reported a status that the model makes impossible."""

    def __init__(self, message, model_dump=None):
        super().__init__(message)
        self.model_dump = model_dump


class NoIncumbentError(SolverError):
    """A MILP stopped without any feasible solution."""


class OracleCapError(PspsError):
    """Brute-force enumeration refused: too many switchable lines."""
