"""Exception hierarchy shared by the estimators and the command line."""


class BlockpickError(Exception):
    """Base class for all package errors."""


class DimensionError(BlockpickError, ValueError):
    """Series dimension does not match the statistic."""


class BlockLengthError(BlockpickError, ValueError):
    """A block length or subsample size is outside its admissible range."""


class ModelError(BlockpickError, ValueError):
    """Invalid process model parameters."""


class ConditionSViolation(BlockpickError):
    """The bias constant B0 vanishes (e.g. i.i.d. data); no finite optimal block exists."""


class NoAnalyticTruth(BlockpickError):
    """The model has no closed-form autocovariance for the requested statistic."""


class DegenerateEstimateError(BlockpickError):
    """A plug-in variance or long-run variance estimate is not positive."""


class ConfigError(BlockpickError, ValueError):
    """Invalid experiment configuration."""


class ExperimentAborted(BlockpickError):
    """Too many degenerate selector outcomes at some sample size."""
