class SupboundError(Exception):
    pass


class TrsParseError(SupboundError):
    pass


class TrsSyntaxError(TrsParseError):
    def __init__(self, message: str, line: int, column: int):
        self.message = message
        self.line = line
        self.column = column
        super().__init__(f"line {self.line}, column {self.column}: {self.message}")


class ArityConflict(TrsParseError):
    def __init__(self, name: str, arities):
        self.name = name
        self.arities = tuple(sorted(arities))
        super().__init__(f"symbol '{self.name}' used with different arities {list(self.arities)}")


class RhsVariableNotInLhs(TrsParseError):
    def __init__(self, variable: str, rule_index: int):
        self.variable = variable
        self.rule_index = rule_index
        super().__init__(f"rule {self.rule_index}: rhs variable {self.variable} not in lhs")


class NonPatternLhs(TrsParseError):
    def __init__(self, symbol: str, rule_index: int):
        self.symbol = symbol
        self.rule_index = rule_index
        super().__init__(
            f"rule {self.rule_index}: non-pattern lhs argument, defined symbol '{self.symbol}' below the root"
        )


class FunctionSyntaxError(SupboundError):
    def __init__(self, message: str, line: int, column: int):
        self.message = message
        self.line = line
        self.column = column
        super().__init__(f"line {self.line}, column {self.column}: {self.message}")


class ArityMismatch(SupboundError):
    def __init__(self, expected: int, got: int, what: str = "function"):
        self.expected = expected
        self.got = got
        super().__init__(f"{what} expects {expected} argument(s), got {got}")


class MissingSymbolMapping(SupboundError):
    def __init__(self, symbols):
        self.symbols = tuple(symbols)
        super().__init__(f"assignment has no function for: {', '.join(self.symbols)}")


class ModelSyntaxError(SupboundError):
    def __init__(self, message: str, line: int = 1, column: int = 1):
        self.message = message
        self.line = line
        self.column = column
        super().__init__(f"model line {self.line}, column {self.column}: {self.message}")


class MissingCoefficient(SupboundError):
    def __init__(self, names):
        self.names = tuple(names)
        super().__init__(f"model has no value for: {', '.join(self.names)}")


class RcUndefined(SupboundError):
    def __init__(self, size: int):
        self.size = size
        super().__init__(f"rc undefined at size {size}")


class ActionNotFound(SupboundError):
    pass


class ConfigurationValidationError(SupboundError):
    pass
