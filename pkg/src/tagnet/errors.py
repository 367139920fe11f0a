"""Exception hierarchy shared by all tagnet modules.

InputError subclasses describe bad inputs (CLI exit code 2);
AnalysisError subclasses describe inputs that are valid but on which
an analysis cannot be carried out (CLI exit code 3).
"""


class TagnetError(Exception):
    pass


class InputError(TagnetError, ValueError):
    pass


class AnalysisError(TagnetError):
    pass


class MalformedRecordError(InputError):
    def __init__(self, path, line_no, reason):
        self.path = str(path)
        self.line_no = line_no
        self.reason = reason
        super().__init__(f"{self.path}:{line_no}: {reason}")


class EmptyTokenError(InputError):
    pass


class ConfigError(InputError):
    pass


class PartitionError(InputError):
    pass


class AttributeMismatchError(InputError):
    pass


class ItemMismatchError(InputError):
    def __init__(self, only_a, only_b):
        self.only_a = sorted(only_a)
        self.only_b = sorted(only_b)
        super().__init__(
            f"item sets differ: only in A {self.only_a}, only in B {self.only_b}"
        )


class UnknownClassError(InputError):
    pass


class EmptyBatchError(InputError):
    pass


class EmptyMatrixError(InputError):
    pass


class EmptyGraphError(AnalysisError, ValueError):
    pass


class EdgelessGraphError(EmptyGraphError):
    pass


class ConvergenceError(AnalysisError, RuntimeError):
    """Raised when a power iteration exhausts ``max_iter``.

    ``iterate`` holds the last (normalized) vector and ``residual`` the
    last successive-iterate difference.
    """

    def __init__(self, measure, iterations, residual, iterate):
        self.measure = measure
        self.iterations = iterations
        self.residual = residual
        self.iterate = iterate
        super().__init__(
            f"{measure} did not converge in {iterations} iterations "
            f"(residual {residual:.3e})"
        )
