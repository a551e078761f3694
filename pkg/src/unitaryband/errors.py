"""Exception types shared by the unitaryband modules."""


class UnitaryBandError(Exception):
    """Base class for all library errors."""


class DegenerateCouplingError(UnitaryBandError, ValueError):
    """Raised when an operation needs ``0 < t`` (or ``t < 1``) and does not get it."""


class WindowTooSmallError(UnitaryBandError, ValueError):
    """Raised when a finite window is too small for the requested construction."""


class SpanTooShortError(UnitaryBandError, ValueError):
    """Raised when a coefficient track does not cover the range an operation needs."""


class WrongVariantError(UnitaryBandError, TypeError):
    """Raised when an operation receives a phase model of an unsupported variant."""


class BudgetExceededError(UnitaryBandError, RuntimeError):
    """Raised when a dense computation would exceed its size budget."""


class ConfigError(UnitaryBandError, ValueError):
    """Raised for malformed run configurations or model documents.

    Parameters
    ----------
    message : str
        Human readable diagnostic.
    field : str, optional
        Dotted path of the offending field.
    line : int, optional
        Line number in the source document, when known.
    """

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)


class BranchPointError(UnitaryBandError, ValueError):
    """Raised when a quantity is evaluated where the period matrix has (nearly) equal eigenvalues."""


class ReportMissingError(UnitaryBandError, FileNotFoundError):
    """Raised when plot data is requested from a run directory without the needed report."""
