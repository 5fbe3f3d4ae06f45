"""Exception hierarchy shared by all modules."""


class TwistMatchError(Exception):
    """Base class for errors raised by this package."""


class ExcludedPrime(TwistMatchError):
    """The rational prime is even, ramified, or divides the discriminant."""


class DenominatorNotCoprime(TwistMatchError):
    pass


class BadReduction(TwistMatchError):
    pass


class BudgetExceeded(TwistMatchError):
    pass


class PrecisionExhausted(TwistMatchError):
    """Interval refinement could not separate two real parts."""


class MissingPrime(TwistMatchError):
    pass


class AdmissibilityError(TwistMatchError):
    """A ramified order-l component was requested at a prime that cannot carry one."""


class UnsupportedDegree(TwistMatchError):
    pass


class DegreeMismatch(TwistMatchError):
    """Oracle degrees are incompatible with an L-series preserving character map."""


class InconsistentOracle(TwistMatchError):
    """Oracle responses contradict the accounting the reconstruction relies on."""


class InductionDataMissing(TwistMatchError):
    pass
