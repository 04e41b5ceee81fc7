"""
Exception hierarchy

Every error raised on purpose by this package derives from `NkpaError` and
carries the process exit code the command line maps it to.
"""

from typing import Any, ClassVar, Dict, Optional, Tuple

EXIT_OK: int = 0
EXIT_VALIDATION: int = 2
EXIT_SOLVER: int = 3
EXIT_IO: int = 4


class NkpaError(RuntimeError):
    """
    Base for all package errors
    """

    exit_code: ClassVar[int] = EXIT_SOLVER


class ValidationError(NkpaError, ValueError):
    """
    Input that does not describe a valid device, trace or parameter set
    """

    exit_code: ClassVar[int] = EXIT_VALIDATION


class DegenerateGeometryError(ValidationError):
    """
    Nanobridge left with no superconducting width after the dead-width
    correction
    """


class InconsistentSpecError(ValidationError):
    """
    Device parameters that contradict each other
    """


class MissingCalibrationError(ValidationError):
    """
    An operation needing a prior calibration record was given none
    """


class TraceFormatError(ValidationError):
    """
    Malformed trace or document, located by path and line where possible
    """

    def __init__(
        self, message: str, *, path: Optional[str] = None, line: Optional[int] = None
    ) -> None:
        self.path: Optional[str] = path
        self.line: Optional[int] = line
        location: str = ""
        if path is not None:
            location = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(f"{location}{message}")


class SolverError(NkpaError):
    """
    A solver or fit failed to produce a trustworthy answer
    """

    exit_code: ClassVar[int] = EXIT_SOLVER


class PumpUnstableError(SolverError):
    """
    Pump steady state is bistable or did not converge
    """

    def __init__(self, message: str, *, last_iterate: Tuple[float, float]) -> None:
        super().__init__(message)
        self.last_iterate: Tuple[float, float] = last_iterate


class DivergentGainError(SolverError):
    """
    Parametric coupling at or above the oscillation threshold
    """


class NoSolutionError(SolverError):
    """
    Target outside what the model can reach
    """

    def __init__(
        self, message: str, *, bracket: Optional[Tuple[float, float]] = None
    ) -> None:
        super().__init__(message)
        self.bracket: Optional[Tuple[float, float]] = bracket


class FitError(SolverError):
    """
    Least-squares fit did not converge
    """

    def __init__(
        self, message: str, *, diagnostics: Optional[Dict[str, Any]] = None
    ) -> None:
        super().__init__(message)
        self.diagnostics: Dict[str, Any] = (
            diagnostics if diagnostics is not None else {}
        )


class IllConditionedError(SolverError):
    """
    Data do not constrain the fitted parameters
    """


class CompressionRangeError(SolverError):
    """
    Gain did not compress by 1 dB within the searched input power range
    """
