"""Exception and warning types raised across the package."""


class SeqFusionError(Exception):
    """Base class for all package errors."""


class MissingColumn(SeqFusionError):
    pass


class NonBinaryLabel(SeqFusionError):
    pass


class NonFiniteValue(SeqFusionError):
    pass


class EmptyModality(SeqFusionError):
    pass


class UnknownModality(SeqFusionError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class LengthMismatch(SeqFusionError, ValueError):
    pass


class WidthMismatch(SeqFusionError, ValueError):
    pass


class InvalidConfig(SeqFusionError, ValueError):
    pass


class AllZeroWeights(SeqFusionError, ValueError):
    pass


class InvalidWeights(SeqFusionError, ValueError):
    pass


class SingleClassTraining(SeqFusionError, ValueError):
    pass


class InsufficientSamples(SeqFusionError, ValueError):
    pass


class InvalidDf(SeqFusionError, ValueError):
    pass


class TooFewSamples(SeqFusionError, ValueError):
    pass


class GateExhausted(SeqFusionError, RuntimeError):
    """No gate-passing split was found within the attempt budget.

    ``failing`` maps ``(part, feature)`` to the p-value of the last rejected
    attempt for every test that did not clear the threshold.
    """

    def __init__(self, message, failing=None):
        super().__init__(message)
        self.failing = dict(failing or {})


class InvalidProfile(SeqFusionError, ValueError):
    pass


class EmptyMatrix(SeqFusionError, ValueError):
    pass


class EmptyList(SeqFusionError, ValueError):
    pass


class DegeneratePartitionWarning(UserWarning):
    """A prior partition had an empty set, so neutral weights were used."""
