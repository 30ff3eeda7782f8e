"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Invalid argument, configuration, or file content."""


class ExactSolverLimitError(ValidationError):
    """Graph too large for the exact independence-number solver."""


class NumericError(FloatingPointError):
    """Non-finite value encountered in a numeric routine."""


class UnsupportedConfigurationError(ValidationError):
    """A valid component used in a combination that has no defined semantics."""


class SimulationError(RuntimeError):
    """A failure inside a simulation run, tagged with where it happened."""

    def __init__(self, message, round_index=None, replicate=None):
        self.message = message
        self.round_index = round_index
        self.replicate = replicate
        where = []
        if replicate is not None:
            where.append(f"replicate {replicate}")
        if round_index is not None:
            where.append(f"round {round_index}")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)
