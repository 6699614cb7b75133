"""Exception hierarchy shared by every layer of the package."""


class KisinError(Exception):
    """Base class for all errors raised by kisin_descent."""


class DivisionByZero(KisinError, ZeroDivisionError):
    pass


class PrecisionExhausted(KisinError):
    """A quantity cannot be decided at the working precision."""


class IndeterminateAtPrecision(PrecisionExhausted):
    pass


class InsufficientDegree(PrecisionExhausted):
    """A truncation asked for degrees that are not fully represented."""


class NotAUnit(KisinError):
    pass


class ParameterMismatch(KisinError, ValueError):
    pass


class MonomialDivisionFailure(KisinError):
    pass


class NoProgress(PrecisionExhausted):
    """A descent round failed to certify its guaranteed error gain."""


class NonTermination(KisinError):
    pass


class ParameterViolation(KisinError, ValueError):
    pass


class PreconditionViolation(KisinError, ValueError):
    def __init__(self, failures):
        self.failures = list(failures)
        super().__init__("; ".join(self.failures))


class CheckFailure(KisinError):
    def __init__(self, clause, detail=""):
        self.clause = clause
        msg = clause if not detail else f"{clause}: {detail}"
        super().__init__(msg)


class NotIntegral(KisinError):
    pass
