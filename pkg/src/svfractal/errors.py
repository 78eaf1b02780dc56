"""Exception hierarchy shared by all svfractal modules."""


class SVFractalError(Exception):
    """Base class for every error raised by this package."""


class ExprError(SVFractalError, ValueError):
    pass


class ExprSyntaxError(ExprError):
    def __init__(self, offset: int, message: str = "unexpected input"):
        self.offset = offset
        super().__init__(f"{message} at offset {offset}")


class UnknownIdentifier(ExprError):
    def __init__(self, name: str, offset: int = 0):
        self.name = name
        self.offset = offset
        super().__init__(f"unknown identifier {name!r} at offset {offset}")


class NonFiniteResult(SVFractalError, ArithmeticError):
    pass


class IndexZero(SVFractalError, IndexError):
    pass


class OutOfDomain(SVFractalError, ValueError):
    pass


class AtInfinityNode(OutOfDomain):
    """Raised by ``locate`` at the accumulation point, which belongs to no I_n."""


class EnvelopeCrossing(SVFractalError, ValueError):
    def __init__(self, t: float):
        self.t = t
        super().__init__(f"lower envelope exceeds upper envelope at t={t!r}")


class DomainMismatch(SVFractalError, ValueError):
    pass


class GridMisaligned(SVFractalError, ValueError):
    pass


class EndpointHypothesisViolated(SVFractalError, ValueError):
    pass


class NoConvergence(SVFractalError, RuntimeError):
    pass


class HypothesisViolated(SVFractalError, ValueError):
    def __init__(self, which: str):
        self.which = which
        super().__init__(f"hypothesis violated: {which}")


class IndexBeyondTruncation(SVFractalError, IndexError):
    pass


class SizeMismatch(SVFractalError, ValueError):
    pass


class TooLarge(SVFractalError, ValueError):
    pass


class DegenerateSequence(SVFractalError, ValueError):
    pass


class MonotonicityViolation(SVFractalError, RuntimeError):
    pass


class TooFewScales(SVFractalError, ValueError):
    pass


class ConfigError(SVFractalError, ValueError):
    pass
