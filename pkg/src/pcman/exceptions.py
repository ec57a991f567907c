"""Exception hierarchy shared by every pcman module."""


class PCError(Exception):
    """Base class for all pcman errors."""


class InvalidMatrix(PCError, ValueError):
    """Raw input cannot be turned into a pairwise comparison matrix."""


class NotSquare(InvalidMatrix):
    pass


class MinimumSize(InvalidMatrix):
    pass


class NonPositiveEntry(InvalidMatrix):
    def __init__(self, i, j, value):
        self.i, self.j, self.value = i, j, value
        super().__init__(f"entry ({i + 1}, {j + 1}) = {value!r} is not a positive finite number")


class NotReciprocal(InvalidMatrix):
    def __init__(self, i, j, product):
        self.i, self.j, self.product = i, j, product
        super().__init__(
            f"entries ({i + 1}, {j + 1}) and ({j + 1}, {i + 1}) multiply to {product:.12g}, not 1"
        )


class NonPositiveWeight(PCError, ValueError):
    def __init__(self, i, value):
        self.i, self.value = i, value
        super().__init__(f"weight {i + 1} = {value!r} is not a positive finite number")


class DimensionMismatch(PCError, ValueError):
    pass


class NoConvergence(PCError, ArithmeticError):
    def __init__(self, max_iter):
        self.max_iter = max_iter
        super().__init__(f"power iteration did not converge in {max_iter} iterations")


class RandomIndexUnavailable(PCError, KeyError):
    def __init__(self, n):
        self.n = n
        super().__init__(f"no random index for n = {n}")

    def __str__(self):
        return self.args[0]


class InvalidIndices(PCError, ValueError):
    pass


class AlphaOutOfRange(PCError, ValueError):
    pass


class NoSwapAchieved(PCError):
    """No alpha in the sweep swapped the two alternatives.

    The best (unsuccessful) result is attached as ``result``.
    """

    def __init__(self, result):
        self.result = result
        super().__init__("no alpha in the sweep achieved the rank swap")


class GenerationBudgetExceeded(PCError, RuntimeError):
    def __init__(self, attempts, detail=""):
        self.attempts = attempts
        msg = f"generation budget exhausted after {attempts} attempts"
        super().__init__(f"{msg}: {detail}" if detail else msg)


class ParseError(PCError, ValueError):
    def __init__(self, message, line=None, column=None):
        self.line, self.column = line, column
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column})" if column is not None else ")")
        super().__init__(message + where)


class ConfigError(PCError, ValueError):
    pass


class UnknownKey(ConfigError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"unknown config key: {name!r}")


class MissingRequired(ConfigError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"missing required config key: {name!r}")


class RangeError(ConfigError):
    def __init__(self, name, detail):
        self.name = name
        super().__init__(f"config key {name!r} out of range: {detail}")
