from __future__ import annotations


class DriftDataError(RuntimeError):
    """Base for every data problem the CLI reports with exit status 1."""


class CorpusFormatError(DriftDataError):
    def __init__(self, details: str, source: str | None = None) -> None:
        self.details = details.strip()
        self.source = source
        if source:
            message = f"{source}: {self.details}"
        else:
            message = self.details
        super().__init__(message)


class RecordParseError(DriftDataError):
    def __init__(self, line_number: int, reason: str, source: str | None = None) -> None:
        self.line_number = line_number
        self.reason = reason
        self.source = source
        prefix = f"{source}:" if source else "line "
        super().__init__(f"{prefix}{line_number}: {reason}")


class EmptyVocabularyError(DriftDataError):
    def __init__(self, field_code: str, year: int) -> None:
        self.field_code = field_code
        self.year = year
        super().__init__(
            f"No keywords in field {field_code!r} for year {year}; "
            "the year cannot take part in dissimilarity computation."
        )


class MeasureDivisionByZero(DriftDataError):
    def __init__(
        self,
        measure: str,
        field_code: str | None = None,
        year_from: int | None = None,
        year_to: int | None = None,
    ) -> None:
        self.measure = measure
        self.field_code = field_code
        self.year_from = year_from
        self.year_to = year_to
        message = f"{measure} is undefined: denominator is zero (distributions have disjoint supports)"
        if field_code is not None and year_from is not None and year_to is not None:
            message = f"{message} for field {field_code!r}, years {year_from}->{year_to}"
        super().__init__(message + ".")

    def __reduce__(self):
        # Raised inside pool workers; keep the structured fields across pickling.
        return (type(self), (self.measure, self.field_code, self.year_from, self.year_to))


class ZeroVarianceColumnError(DriftDataError):
    def __init__(self, column: int, label: str | None = None) -> None:
        self.column = column
        self.label = label
        name = label or f"column {column}"
        super().__init__(f"{name} has zero variance; the corpus is degenerate for this analysis.")


class ConvergenceFailure(DriftDataError):
    def __init__(self, sweeps: int, off_norm: float) -> None:
        self.sweeps = sweeps
        self.off_norm = off_norm
        super().__init__(
            f"Jacobi eigensolver did not converge after {sweeps} sweeps "
            f"(off-diagonal norm {off_norm:.3e})."
        )


class MissingPairError(DriftDataError):
    def __init__(self, field_code: str, t1: int, t2: int, missing_year: int) -> None:
        self.field_code = field_code
        self.t1 = t1
        self.t2 = t2
        self.missing_year = missing_year
        super().__init__(
            f"Series for field {field_code!r} has no pair {missing_year}->{missing_year + 1} "
            f"inside window {t1}:{t2}."
        )


class InsufficientDataError(DriftDataError):
    pass


class OutputNameCollisionError(DriftDataError):
    def __init__(self, file_name: str, first_field: str, second_field: str) -> None:
        self.file_name = file_name
        self.first_field = first_field
        self.second_field = second_field
        super().__init__(
            f"Fields {first_field!r} and {second_field!r} would both be written to {file_name!r}."
        )
