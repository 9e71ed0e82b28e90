"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid hyperparameter value or inconsistent option combination."""


class InputShapeError(ValueError):
    """Input dimensions inconsistent with the network or dataset."""


class NumericError(ArithmeticError):
    """Non-finite value encountered during computation."""


class DivergenceError(NumericError):
    """Training objective became non-finite."""

    def __init__(self, epoch, message=None):
        self.epoch = epoch
        super().__init__(message or f"objective became non-finite at epoch {epoch}")
