"""Exception hierarchy shared by the evaluator, the pipeline and the CLI."""


class SecureCPDError(Exception):
    """Base class; ``exit_code`` is what the CLI returns for it."""

    exit_code = 1


class ParameterError(SecureCPDError, ValueError):
    exit_code = 2


class CapacityError(SecureCPDError, ValueError):
    """Input does not fit in the configured number of slots."""

    exit_code = 2


class ContextMismatchError(SecureCPDError, ValueError):
    exit_code = 2


class DepthOverflowError(SecureCPDError, RuntimeError):
    """A multiplication would exceed the context's depth budget."""

    exit_code = 4


class ConfidenceError(SecureCPDError, RuntimeError):
    """The decoded one-hot vector does not single out one index."""

    exit_code = 3


class DataError(SecureCPDError, ValueError):
    """Malformed input file or series."""

    exit_code = 5
