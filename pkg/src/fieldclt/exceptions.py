"""Exception hierarchy shared by all modules."""


class FieldCLTError(Exception):
    """Base class for errors raised by fieldclt."""


class ConfigError(FieldCLTError, ValueError):
    """Malformed or incomplete experiment configuration."""


class AssumptionViolation(FieldCLTError, ValueError):
    """An input lies outside the hypotheses of a limit theorem.

    ``assumption`` carries the label of the violated hypothesis (``"A"``,
    ``"B"``, ``"K"``, ...) so callers can report it verbatim.
    """

    def __init__(self, assumption, message):
        self.assumption = assumption
        super().__init__(f"Assumption {assumption} violated: {message}")


class NumericalError(FieldCLTError, ArithmeticError):
    """A numerical procedure failed to reach its contract."""


class EmbeddingError(NumericalError):
    """Circulant embedding stayed indefinite after all padding retries."""
