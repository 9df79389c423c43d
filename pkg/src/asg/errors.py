"""Exception types shared across the package."""


class AsgError(Exception):
    pass


class AutomatonSyntaxError(AsgError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", col {column}" if column is not None else "") + ")"
        super().__init__(message + where)


class AutomatonValidationError(AsgError):
    pass


class LevelLimitExceeded(AsgError):
    pass


class NotBounded(AsgError):
    pass


class InflationError(AsgError):
    pass


class NotACovering(AsgError):
    def __init__(self, vertex, reason):
        self.vertex = vertex
        self.reason = reason
        super().__init__(f"not an unramified covering at vertex {vertex!r}: {reason}")


class NotNormal(AsgError):
    pass


class NonAbelianUnsupported(AsgError):
    pass


class LoopsUnsupported(AsgError):
    pass


class OrderMismatch(AsgError):
    pass


class ExactDivisionFailure(AsgError):
    pass


class NotRationalInteger(AsgError):
    def __init__(self, index):
        self.index = index
        super().__init__(f"coefficient {index} is not a rational integer")
