"""Exception hierarchy shared by every module."""


class CyclicBrauerError(Exception):
    """Base class for all library errors."""


class DivisionByZero(CyclicBrauerError, ZeroDivisionError):
    pass


class BothZero(CyclicBrauerError):
    """gcd(0, 0) requested."""


class ZeroPolynomial(CyclicBrauerError):
    pass


class DegreeBoundExceeded(CyclicBrauerError):
    """An exact decision would need factorization beyond the configured bound."""


class HeightCapExceeded(CyclicBrauerError):
    """Coefficient height grew past the hard cap; never degrade silently."""


class PrecisionUnrepresentable(CyclicBrauerError):
    pass


class NotSimpleRoot(CyclicBrauerError):
    pass


class InsufficientPrecision(CyclicBrauerError):
    pass


class WildPlace(CyclicBrauerError):
    """A tame-only operation was called at a place dividing p."""


class EvaluationAtRamification(CyclicBrauerError):
    """Fiberwise evaluation requested at an exact ramification point."""


class ZeroAtCenter(CyclicBrauerError):
    pass


class SubdivisionDepthExceeded(CyclicBrauerError):
    pass


class ConstantG(CyclicBrauerError):
    pass


class DegenerateH(CyclicBrauerError):
    pass


class DegreeTooSmall(CyclicBrauerError):
    pass


class SearchExhausted(CyclicBrauerError):
    """A bounded deterministic search ran out of candidates."""


class PropertyFailed(CyclicBrauerError):
    def __init__(self, which: str, detail: str = ""):
        self.which = which
        super().__init__(f"property {which} failed" + (f": {detail}" if detail else ""))


class ObstructionNotEstablished(CyclicBrauerError):
    def __init__(self, place: str, detail: str = ""):
        self.place = place
        super().__init__(f"no obstruction at place {place}" + (f": {detail}" if detail else ""))
