"""
Domain errors. Every one is a ValueError so callers can treat bad input uniformly.
Row and column indices are 1-based.
"""


class CouplingError(ValueError):
    pass


class ConfigurationError(CouplingError):
    pass


class NotSquare(CouplingError):
    def __init__(self, shape):
        self.shape = tuple(shape)
        super().__init__(f"Matrix must be square, got shape {self.shape}")


class NegativeEntry(CouplingError):
    def __init__(self, row, column, value):
        self.row, self.column, self.value = row, column, value
        super().__init__(f"Negative entry {value} at row {row}, column {column}")


class RowSumNotOne(CouplingError):
    def __init__(self, row, total):
        self.row, self.total = row, total
        super().__init__(f"Row {row} sums to {total}, not 1")


class NotIrreducible(CouplingError):
    def __init__(self, message="Transition matrix is not irreducible"):
        super().__init__(message)


class NotDoublyStochastic(CouplingError):
    def __init__(self, column, total):
        self.column, self.total = column, total
        super().__init__(f"Column {column} sums to {total}, not 1")


class DimensionMismatch(CouplingError):
    def __init__(self, expected, actual):
        self.expected, self.actual = expected, actual
        super().__init__(f"State count mismatch: expected {expected}, got {actual}")


class BadLength(CouplingError):
    def __init__(self, text, n):
        self.text, self.n = text, n
        super().__init__(f"{text!r} does not describe a function on {n} states")


class OutOfRangeSymbol(CouplingError):
    def __init__(self, text, symbol, n):
        self.text, self.symbol, self.n = text, symbol, n
        super().__init__(f"Symbol {symbol!r} in {text!r} is outside 1..{n}")


class InvalidMeasure(CouplingError):
    pass


class SupportTooLarge(CouplingError):
    def __init__(self, size, cap):
        self.size, self.cap = size, cap
        super().__init__(f"Support of {size} functions exceeds the cap of {cap}")


class StateBudgetExceeded(CouplingError):
    def __init__(self, budget):
        self.budget = budget
        super().__init__(f"Reachable multichain states exceed the budget of {budget}")


class CapExceeded(CouplingError):
    pass


class FloatModeRejected(CouplingError):
    def __init__(self, operation):
        self.operation = operation
        super().__init__(f"{operation} needs exact rational input; convert with to_rational()")


class PreconditionFailed(CouplingError):
    def __init__(self, check, detail=''):
        self.check = check
        super().__init__(f"Precondition failed: {check}" + (f" ({detail})" if detail else ''))


class NotADivisor(CouplingError):
    def __init__(self, ell, n):
        self.ell, self.n = ell, n
        super().__init__(f"{ell} does not divide {n}")
