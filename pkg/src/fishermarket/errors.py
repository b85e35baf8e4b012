"""Exception hierarchy shared by every module of the package."""


class MarketError(Exception):
    """Base class for all package errors."""


class InvalidInstance(MarketError, ValueError):
    """A market instance violates one of its invariants."""


class _IndexedInvalid(InvalidInstance):
    what = "entry"

    def __init__(self, index: int, detail: str = ""):
        self.index = int(index)
        msg = f"{type(self).__name__}({self.index})"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class ZeroRow(_IndexedInvalid):
    pass


class ZeroColumn(_IndexedInvalid):
    pass


class NonpositiveBudget(_IndexedInvalid):
    pass


class NegativeValue(_IndexedInvalid):
    pass


class SimplexViolation(_IndexedInvalid):
    pass


class DimensionMismatch(MarketError, ValueError):
    pass


class WrongUtilityClass(MarketError, ValueError):
    pass


class EmptyInput(MarketError, ValueError):
    pass


class InfeasibleBox(MarketError, ValueError):
    pass


class ZeroPrice(MarketError, ArithmeticError):
    def __init__(self, index: int):
        self.index = int(index)
        super().__init__(f"ZeroPrice({self.index}): item has no bids")


class ZeroUtility(MarketError, ArithmeticError):
    def __init__(self, index: int):
        self.index = int(index)
        super().__init__(f"ZeroUtility({self.index})")


class ZeroDotProduct(MarketError, ArithmeticError):
    def __init__(self, index: int):
        self.index = int(index)
        super().__init__(f"ZeroDotProduct({self.index}): <a_i, p> = 0")


class NonFiniteObjective(MarketError, FloatingPointError):
    pass


class BacktrackOverflow(MarketError, RuntimeError):
    pass


class DidNotConverge(MarketError, RuntimeError):
    """Raised when an iterative method exhausts its budget.

    ``best`` carries the most accurate iterate found so callers can still
    inspect it.
    """

    def __init__(self, max_iters: int, best=None, detail: str = ""):
        self.max_iters = max_iters
        self.best = best
        super().__init__(f"no convergence within {max_iters} iterations {detail}".strip())


class ReferenceDidNotConverge(DidNotConverge):
    pass


class MissingField(MarketError, ValueError):
    pass


class TooLarge(MarketError, ValueError):
    pass


class SolverUnsupported(MarketError, ValueError):
    pass


class IoError(MarketError, OSError):
    pass


class FormatError(InvalidInstance):
    """Malformed instance, candidate or config text."""
