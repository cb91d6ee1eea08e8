"""Exception hierarchy shared by all modules."""


class LRSpinError(Exception):
    """Base class; ``exit_code`` is what the CLI returns for it."""

    exit_code = 3


class ValidationError(LRSpinError, ValueError):
    exit_code = 2

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class NumericalError(LRSpinError, ArithmeticError):
    exit_code = 3


class ConvergenceError(NumericalError):
    def __init__(self, dim: int, iterations=None, detail: str = ""):
        self.dim = dim
        self.iterations = iterations
        msg = f"eigensolver failed for dim={dim}"
        if iterations is not None:
            msg += f" after {iterations} iterations"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class DegeneracyError(NumericalError):
    pass


class FlatChannelError(NumericalError):
    pass


class ConsistencyError(LRSpinError, RuntimeError):
    """Internal construction bug, e.g. the full-space Hamiltonian leaks out of a sector."""

    exit_code = 1
