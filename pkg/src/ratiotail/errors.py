"""Exception hierarchy.

Errors split into two families, which the CLI maps to distinct exit codes:
invalid input (``ModelError``, a ``ValueError``) and numerical failure
(``NumericalError``, an ``ArithmeticError``).
"""


class ModelError(ValueError):
    """Invalid model definition, parameter or argument."""


class NumericalError(ArithmeticError):
    """A numerical routine failed to produce a trustworthy value."""


class QuadratureError(NumericalError):
    pass


class SamplingError(NumericalError):
    """Conditional inversion did not converge."""


class NormingError(NumericalError):
    """Norming constants do not exist (bounded ratio)."""


class DegenerateStatisticError(NumericalError):
    """The original quotient coefficient evaluated to 0/0."""
