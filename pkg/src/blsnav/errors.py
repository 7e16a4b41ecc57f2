"""Exception hierarchy shared by every module."""


class BlsError(Exception):
    """Base class for all errors raised by blsnav."""


class ConfigurationError(BlsError, ValueError):
    """A network or experiment configuration is malformed.

    ``layer`` is the index of the offending layer when the problem is local to
    one layer of a network, otherwise ``None``.
    """

    def __init__(self, message, layer=None):
        if layer is not None:
            message = f"layer {layer}: {message}"
        super().__init__(message)
        self.layer = layer


class InputError(BlsError, ValueError):
    """An argument violates an operation's precondition."""


class NumericError(BlsError, ArithmeticError):
    """A numerical routine failed (non-finite values, no convergence).

    ``iteration`` carries the sweep or traversal step at which it happened.
    """

    def __init__(self, message, iteration=None):
        if iteration is not None:
            message = f"{message} (iteration {iteration})"
        super().__init__(message)
        self.iteration = iteration


class DegenerateFrameError(NumericError):
    """Every singular value of the frame falls at or below the threshold."""
