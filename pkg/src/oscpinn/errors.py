class OscPinnError(Exception):
    """Base class for errors raised by this package."""


class NonFiniteError(OscPinnError, ArithmeticError):
    """A NaN or infinity appeared in a network, loss, or gradient evaluation."""


class IntegrationError(OscPinnError, RuntimeError):
    """A reference integrator could not continue."""


class ConfigError(OscPinnError, ValueError):
    """Invalid run configuration. ``problems`` lists every violation found."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))
