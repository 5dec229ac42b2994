"""Exception hierarchy; ``code`` is the token used in CLI error lines."""


class SLWaveError(Exception):
    code = "error"


class ParameterError(SLWaveError, ValueError):
    code = "param"


class DataError(SLWaveError, ValueError):
    code = "data"


class NumericError(SLWaveError, ArithmeticError):
    code = "numeric"


class NotPositiveDefinite(ParameterError):
    code = "not-positive-definite"


class SingularityError(NumericError):
    code = "singular"
