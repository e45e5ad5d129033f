class NetPercolateError(Exception):
    """Root of every error raised by the netpercolate apps."""


class DomainError(NetPercolateError, ValueError):
    """An argument lies outside the domain of an operation."""


class ParseError(DomainError):
    def __init__(self, message: str, line_number: int) -> None:
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class DegenerateClassError(DomainError):
    def __init__(self, edge_class: int) -> None:
        super().__init__(
            f"edge class {edge_class} has mean degree 0; no edge of this "
            f"class can carry an error, drop the class from the input"
        )
        self.edge_class = edge_class


class NumericError(NetPercolateError, ArithmeticError):
    def __init__(self, message: str, condition: float | None = None) -> None:
        if condition is not None:
            message = f"{message} (condition estimate {condition:.3e})"
        super().__init__(message)
        self.condition = condition


class ConvergenceError(NumericError):
    def __init__(self, residual: float, iterations: int) -> None:
        super().__init__(
            f"fixed-point iteration did not converge after {iterations} "
            f"iterations, last residual {residual:.3e}"
        )
        self.residual = residual
        self.iterations = iterations
