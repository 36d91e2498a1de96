"""Exception types raised across the toolkit."""


class ForecastError(Exception):
    """Base class; the CLI maps these to exit code 2."""


class MissingHeader(ForecastError):
    pass


class RaggedRow(ForecastError):
    def __init__(self, line_no: int, expected: int, got: int):
        super().__init__(f"line {line_no}: expected {expected} cells, got {got}")
        self.line_no = line_no
        self.expected = expected
        self.got = got


class UnknownCountry(ForecastError):
    pass


class EmptySeries(ForecastError):
    pass


class DegenerateSplit(ForecastError):
    pass


class LengthMismatch(ForecastError):
    pass


class EmptyInput(ForecastError):
    pass


class DegenerateDesign(ForecastError):
    pass


class EmptyTrainingSet(ForecastError):
    pass


class DegenerateInput(ForecastError):
    pass


class InfeasiblePoint(ForecastError):
    pass


class HorizonBeforeData(ForecastError):
    pass


class ManifestError(ForecastError):
    pass


class NonConvergenceWarning(UserWarning):
    """SMO hit its iteration cap with a KKT gap above 10 * tol."""
