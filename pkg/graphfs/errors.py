"""Exceptions raised by graphfs."""


class GraphfsError(ValueError):
    """Base class of all the errors raised on purpose in graphfs."""
    pass


class ShapeError(GraphfsError):
    """The shapes of the operands do not conform."""
    pass


class DomainError(GraphfsError, ArithmeticError):
    """An operation is evaluated outside of its domain, like log(0)."""
    pass


class NotPositiveDefiniteError(GraphfsError, ArithmeticError):
    """A non-positive pivot is found in the Cholesky factorization."""

    def __init__(self, pivot: int, value: float):
        self.pivot = pivot
        self.value = value
        super().__init__(
            "Matrix is not positive definite: pivot {} is {:.3e}.".format(pivot, value)
        )


class SingularMatrixError(GraphfsError, ArithmeticError):
    """A triangular factor has a zero on its diagonal."""
    pass


class DegenerateRowError(GraphfsError, ArithmeticError):
    """A distance row has no spread, so the k-NN weights are undefined."""

    def __init__(self, row: int, reason: str, epoch: int = None):
        self.row = row
        self.epoch = epoch
        self.reason = reason
        where = "row" if row is None else "row {}".format(row)
        if epoch is not None:
            where += " at epoch {}".format(epoch)
        super().__init__("Degenerate distance {}: {}.".format(where, reason))

    def at_epoch(self, epoch: int) -> "DegenerateRowError":
        """The same error with the epoch attached."""
        return DegenerateRowError(self.row, self.reason, epoch=epoch)


class NumericError(GraphfsError, ArithmeticError):
    """A computation produces non-finite values."""
    pass


class ConfigError(GraphfsError):
    """A configuration field has an invalid value."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__("Invalid '{}': {}".format(field, message))


class ParseError(GraphfsError):
    """A data file cannot be parsed."""

    def __init__(self, message: str, row: int = None, col: int = None, line: int = None):
        self.row = row
        self.col = col
        self.line = line
        where = []
        if line is not None:
            where.append("line {}".format(line))
        if row is not None:
            where.append("row {}".format(row))
        if col is not None:
            where.append("column {}".format(col))
        prefix = "At {}: ".format(", ".join(where)) if where else ""
        super().__init__(prefix + message)


class EmptyDatasetError(GraphfsError):
    """No usable sample or feature remains."""
    pass
