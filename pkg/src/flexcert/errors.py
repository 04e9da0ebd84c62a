"""Exception hierarchy. Everything raised on purpose derives from FlexcertError."""


class FlexcertError(Exception):
    pass


class NumericalError(FlexcertError):
    """Numerical failures; the CLI maps these to exit code 3."""


class ConfigError(FlexcertError):
    """Bad inputs or configuration; the CLI maps these to exit code 2."""


# numerics
class NotSymmetric(ConfigError):
    pass


class NotPSD(NumericalError):
    pass


class NoConvergence(NumericalError):
    pass


# lp
class DimensionMismatch(ConfigError):
    pass


class NumericalBreakdown(NumericalError):
    pass


# uncertainty
class ShapeMismatch(ConfigError):
    pass


class TooFewSamples(ConfigError):
    pass


class DegenerateComponent(NumericalError):
    pass


class IndexOutOfRange(ConfigError):
    pass


class EmptyInput(ConfigError):
    pass


# network
class Disconnected(ConfigError):
    pass


class SingularSusceptance(NumericalError):
    pass


class BadDimension(ConfigError):
    pass


class InvalidCase(ConfigError):
    pass


# loadability
class InfeasibleInput(NumericalError):
    pass


class RowExplosion(NumericalError):
    pass


class EmptyBox(ConfigError):
    pass


# ddio
class SubproblemInfeasible(NumericalError):
    pass


class NotMinimal(ConfigError):
    pass
