"""Exception types shared across the package."""


class NavgateError(Exception):
    """Base class for all package errors."""


class ShapeMismatchError(NavgateError):
    pass


class UnknownOpError(NavgateError):
    pass


class NonScalarLossError(NavgateError):
    pass


class MissingGradientError(NavgateError):
    pass


class NonDeterministicForwardError(NavgateError):
    pass


class NanDetectedError(NavgateError):
    pass


class DegenerateStatsError(NavgateError):
    pass


class UnknownScenarioError(NavgateError):
    pass


class PoseOutOfBoundsError(NavgateError):
    pass


class NoPathError(NavgateError):
    pass


class DatasetError(NavgateError):
    pass


class CheckpointError(NavgateError):
    pass


class ConfigError(NavgateError):
    pass
