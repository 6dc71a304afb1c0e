"""Exception hierarchy.

Every error carries an ``exit_code`` used by the command-line front end:
1 for configuration errors, 2 for bad input data, 3 for failed hypotheses.
"""


class ConvProdError(Exception):
    exit_code = 2


class ConfigError(ConvProdError, ValueError):
    exit_code = 1


class InputError(ConvProdError, ValueError):
    exit_code = 2


# measures
class MeasureError(InputError):
    pass


class EmptySupport(MeasureError):
    pass


class NegativeMass(MeasureError):
    pass


class MassDeviation(MeasureError):
    pass


class DuplicatePoint(MeasureError):
    pass


class FamilyExhausted(ConvProdError, IndexError):
    exit_code = 1


class ParameterOutOfRange(ConfigError):
    pass


# seqnorms
class EmptySequence(InputError):
    pass


class RhoOutOfRange(ConfigError):
    pass


class TooLong(ConfigError):
    pass


class BlockOutOfRange(ConfigError):
    pass


# spectral / dyadic / harness
class NonCenteredFamily(ConvProdError, ValueError):
    exit_code = 3


class RangeViolation(ConfigError):
    pass


class SizeMismatch(InputError):
    pass


class PreconditionFailed(ConvProdError):
    """A hypothesis required by an experiment does not hold.

    ``hypothesis`` names the violated condition (e.g. ``"strict-aperiodicity"``).
    """

    exit_code = 3

    def __init__(self, hypothesis, detail=""):
        self.hypothesis = hypothesis
        self.detail = detail
        msg = f"precondition failed: {hypothesis}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)
