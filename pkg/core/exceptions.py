class OilsignalError(ValueError):
    """Base class for every domain failure raised by the pipeline."""


class DataError(OilsignalError):
    """Input data is missing, malformed or inconsistent."""

    def __init__(self, message, row=None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class FetchError(OilsignalError):
    """A remote price source could not be retrieved."""

    def __init__(self, message, url):
        self.url = url
        super().__init__(f"{message} ({url})")


class InsufficientDataError(OilsignalError):
    pass


class ConstantSeriesError(OilsignalError):
    """A computation needs non-zero variance or a non-degenerate range."""


class AlignmentError(OilsignalError):
    pass


class ConvergenceError(OilsignalError):
    """An iterative solver stopped before meeting its tolerance."""

    def __init__(self, message, residual=None):
        self.residual = residual
        if residual is not None:
            message = f"{message} (final residual {residual:.3e})"
        super().__init__(message)


class NonStationaryError(OilsignalError):
    pass


class BoundarySolutionError(OilsignalError):
    """A variance model estimate sits on the covariance-stationarity boundary."""


class DivergenceError(OilsignalError):
    def __init__(self, epoch, sample):
        self.epoch = epoch
        self.sample = sample
        super().__init__(
            f"non-finite loss at epoch {epoch}, sample {sample}"
        )


class SearchError(OilsignalError):
    """Every hyperparameter trial failed."""
