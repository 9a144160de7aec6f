"""Exception hierarchy. Every error raised on bad input data derives from DataError."""

from __future__ import annotations


class DataError(ValueError):
    """Input data violates a format or validity rule."""


class ParseError(DataError):
    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        self.message = message
        self.line = line
        self.source = source
        where = ""
        if source:
            where += f"{source}:"
        if line is not None:
            where += f"line {line}: "
        elif where:
            where += " "
        super().__init__(f"{where}{message}")


class LexiconError(DataError):
    pass


class AblationError(DataError):
    pass


class NamePoolExhausted(AblationError):
    pass


class ScoringError(DataError):
    pass


class IngestError(DataError):
    """Carries every row-level problem found, not only the first."""

    def __init__(self, problems: list[tuple[int, str]]):
        self.problems = problems
        lines = [f"row {row}: {msg}" for row, msg in problems]
        super().__init__("\n".join(lines))


class CodingError(DataError):
    pass
