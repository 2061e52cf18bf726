"""Exception types shared across the package."""


class PreconditionError(ValueError):
    """A documented precondition of an operation does not hold."""


class CertificateError(ValueError):
    """Requested parameters do not satisfy the instance's certificate."""


class InfeasiblePrecisionError(ValueError):
    """Target accuracy cannot be realised with the given constants."""


class ConfigError(ValueError):
    """Invalid experiment configuration; ``problems`` lists every violation."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class NumericFailure(ArithmeticError):
    """An iterate became non-finite. The partial trajectory is attached."""

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory
