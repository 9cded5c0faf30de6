"""Exceptions raised by the delay-margin toolkit."""

from typing import Optional, Sequence


class DelayMarginError(Exception):
    """Base class for every error the toolkit raises on purpose."""


class ConfigurationError(DelayMarginError, ValueError):
    """Invalid sweep, simulation or command-line configuration."""


class MatrixFormatError(DelayMarginError):
    """A matrix file could not be read; row/column are 1-based when known."""

    def __init__(self, message: str, path: Optional[str] = None,
                 row: Optional[int] = None, column: Optional[int] = None):
        location = ''
        if path:
            location = f"{path}"
            if row is not None:
                location += f", row {row}"
            if column is not None:
                location += f", column {column}"
            location += ': '
        super().__init__(f"{location}{message}")
        self.path = path
        self.row = row
        self.column = column


class DimensionMismatchError(DelayMarginError):
    """A0 and A1 do not share the same square shape."""


class EigenSolverError(DelayMarginError):
    """The dense eigensolver did not converge."""

    def __init__(self, message: str, t: Optional[float] = None):
        super().__init__(message if t is None else f"{message} (T = {t!r})")
        self.t = t


class PreconditionError(DelayMarginError):
    """The system violates an assumption of the sweep."""


class UnstableDelayFreeError(PreconditionError):
    """The delay-free system (tau = 0) is not asymptotically stable."""


class ZeroRootError(PreconditionError):
    """det(A0 + A1) vanishes: s = 0 is a characteristic root for every delay."""


class BracketLostError(DelayMarginError):
    """Refinement lost track of the crossing eigenvalue inside a bracket."""

    def __init__(self, message: str, t_lo: float, t_hi: float,
                 spectrum_lo: Sequence[complex] = (), spectrum_hi: Sequence[complex] = ()):
        detail = (f"{message} in [{t_lo!r}, {t_hi!r}]; "
                  f"spectrum at T_lo: {list(spectrum_lo)}; spectrum at T_hi: {list(spectrum_hi)}")
        super().__init__(detail)
        self.t_lo = t_lo
        self.t_hi = t_hi
        self.spectrum_lo = list(spectrum_lo)
        self.spectrum_hi = list(spectrum_hi)


class SpuriousCrossingError(DelayMarginError):
    """No unit-modulus generalized eigenvalue exists for a reported frequency."""

    def __init__(self, message: str, omega: float):
        super().__init__(f"{message} (omega = {omega!r})")
        self.omega = omega


class ResourceGuardError(DelayMarginError):
    """A dense construction would exceed the configured memory cap."""

    def __init__(self, message: str, required_bytes: float, cap_bytes: float):
        super().__init__(f"{message}: needs {required_bytes:.4g} bytes, cap is {cap_bytes:.4g} bytes")
        self.required_bytes = required_bytes
        self.cap_bytes = cap_bytes


class ConsistencyError(DelayMarginError):
    """The stability walk produced an impossible pole count."""


class ScanChunkError(DelayMarginError):
    """A worker failed while scanning one contiguous chunk of the T grid."""

    def __init__(self, message: str, t_lo: float, t_hi: float):
        # args must mirror the signature so the error survives pickling between processes
        super().__init__(message, t_lo, t_hi)
        self.message = message
        self.t_lo = t_lo
        self.t_hi = t_hi

    def __str__(self):
        return f"{self.message} (chunk T in [{self.t_lo!r}, {self.t_hi!r}])"
