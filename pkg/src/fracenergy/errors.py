"""Exception hierarchy shared by the package."""

from __future__ import annotations


class FracEnergyError(Exception):
    """Base class for errors raised by this package."""


class HypothesisError(FracEnergyError):
    """A problem violates the hypotheses of the theorem it is meant to satisfy."""

    def __init__(self, report) -> None:
        self.report = report
        failed = ", ".join(c.name for c in report.checks if not c.passed)
        super().__init__(f"hypotheses violated: {failed}")


class NumericalError(FracEnergyError):
    """A solver produced non-finite values or hit a singular system."""

    def __init__(self, message: str, step: int | None = None, index: int | None = None) -> None:
        self.step = step
        self.index = index
        super().__init__(message)


class ProblemFileError(FracEnergyError):
    """Syntax or semantic error in a problem file, with 1-based line/column."""

    def __init__(self, message: str, line: int = 0, column: int = 0) -> None:
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line else ""
        super().__init__(f"{where}{message}")
