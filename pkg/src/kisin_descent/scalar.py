"""Elements of Q_p at capped absolute precision.

A :class:`PadicScalar` stores ``unit * p**valuation`` known modulo
``p**abs_prec``.  ``abs_prec`` may be ``math.inf`` for exact literals such as
``-1`` or ``p``; a certified zero ``O(p^N)`` has ``valuation = inf`` and
``unit = 0``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction

from .errors import DivisionByZero, PrecisionExhausted

INF = math.inf


def vp_int(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    if n == 0:
        raise ValueError("valuation of 0")
    if n % p:
        return 0
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def split_int(n: int, p: int) -> tuple[int, int]:
    """Return ``(v, u)`` with ``n = u * p**v`` and ``p`` not dividing ``u``."""
    v = vp_int(n, p)
    return v, n // p**v


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


@dataclass(frozen=True)
class PadicScalar:
    p: int
    valuation: float | int
    unit: int
    abs_prec: float | int

    def __post_init__(self):
        if self.valuation != INF:
            if self.valuation >= self.abs_prec:
                raise ValueError("valuation must be below abs_prec")
            if self.unit % self.p == 0:
                raise ValueError("unit divisible by p")

    # -- construction ------------------------------------------------------

    @classmethod
    def make(cls, p: int, value, abs_prec=INF) -> "PadicScalar":
        """Build from an int or Fraction; ``abs_prec`` caps the precision."""
        q = Fraction(value)
        if q == 0:
            return cls(p, INF, 0, abs_prec)
        vn, un = split_int(q.numerator, p)
        vd, ud = split_int(q.denominator, p)
        v = vn - vd
        if abs_prec == INF:
            if ud not in (1, -1):
                raise PrecisionExhausted(
                    f"{value} has no exact {p}-adic integer unit; give abs_prec")
            return cls(p, v, un * ud, INF)
        return cls._normalize(p, un * pow(ud, -1, p ** max(abs_prec - v, 1)), v, abs_prec)

    @classmethod
    def zero(cls, p: int, abs_prec=INF) -> "PadicScalar":
        return cls(p, INF, 0, abs_prec)

    @classmethod
    def _normalize(cls, p, n, shift, abs_prec):
        """Element ``n * p**shift`` known modulo ``p**abs_prec``."""
        if abs_prec != INF:
            rel = abs_prec - shift
            if rel <= 0:
                return cls(p, INF, 0, abs_prec)
            n %= p**rel
        if n == 0:
            return cls(p, INF, 0, abs_prec)
        v, u = split_int(n, p)
        v += shift
        if abs_prec != INF:
            u %= p ** (abs_prec - v)
        return cls(p, v, u, abs_prec)

    # -- queries -----------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        """True for a certified zero (exact or ``O(p^N)``)."""
        return self.valuation == INF

    @property
    def is_exact(self) -> bool:
        return self.abs_prec == INF

    def _vbound(self):
        # lower bound for the true valuation
        return self.abs_prec if self.is_zero else self.valuation

    def to_fraction(self) -> Fraction:
        """The stored representative as an exact rational."""
        if self.is_zero:
            return Fraction(0)
        return Fraction(self.unit) * Fraction(self.p) ** self.valuation

    def residue(self) -> int:
        """Image in F_p; requires an integral element known to one digit."""
        if self._vbound() < 0:
            raise PrecisionExhausted("element is not integral")
        if self.abs_prec < 1:
            raise PrecisionExhausted("fewer than one p-adic digit known")
        return 0 if self.valuation >= 1 else self.unit % self.p

    def equals_at_precision(self, other: "PadicScalar") -> bool:
        return (self - other).is_zero

    # -- arithmetic --------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, PadicScalar):
            if other.p != self.p:
                raise ValueError("different primes")
            return other
        return PadicScalar.make(self.p, other)

    def __add__(self, other):
        return scalar_add(self, self._coerce(other))

    __radd__ = __add__

    def __neg__(self):
        return scalar_neg(self)

    def __sub__(self, other):
        return scalar_add(self, scalar_neg(self._coerce(other)))

    def __rsub__(self, other):
        return scalar_add(self._coerce(other), scalar_neg(self))

    def __mul__(self, other):
        return scalar_mul(self, self._coerce(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return scalar_mul(self, scalar_inv(self._coerce(other)))

    def inverse(self, abs_prec=None) -> "PadicScalar":
        return scalar_inv(self, abs_prec)

    def lift(self, abs_prec) -> "PadicScalar":
        """Reduce (never extend) precision to ``abs_prec``."""
        if abs_prec >= self.abs_prec:
            return self
        if self.is_zero:
            return PadicScalar.zero(self.p, abs_prec)
        return PadicScalar._normalize(self.p, self.unit, self.valuation, abs_prec)

    # -- text --------------------------------------------------------------

    def __str__(self):
        return format_scalar(self)

    def __repr__(self):
        return f"PadicScalar({format_scalar(self)!r})"


def scalar_add(x: PadicScalar, y: PadicScalar) -> PadicScalar:
    prec = min(x.abs_prec, y.abs_prec)
    if x.is_zero and y.is_zero:
        return PadicScalar.zero(x.p, prec)
    if x.is_zero:
        return y.lift(prec)
    if y.is_zero:
        return x.lift(prec)
    e = min(x.valuation, y.valuation)
    n = x.unit * x.p ** (x.valuation - e) + y.unit * y.p ** (y.valuation - e)
    return PadicScalar._normalize(x.p, n, e, prec)


def scalar_neg(x: PadicScalar) -> PadicScalar:
    if x.is_zero:
        return x
    return PadicScalar._normalize(x.p, -x.unit, x.valuation, x.abs_prec)


def scalar_mul(x: PadicScalar, y: PadicScalar) -> PadicScalar:
    prec = min(x.abs_prec + y._vbound(), y.abs_prec + x._vbound())
    if x.is_zero or y.is_zero:
        if (x.is_zero and x.is_exact) or (y.is_zero and y.is_exact):
            return PadicScalar.zero(x.p)
        return PadicScalar.zero(x.p, prec)
    return PadicScalar._normalize(x.p, x.unit * y.unit, x.valuation + y.valuation, prec)


def scalar_inv(x: PadicScalar, abs_prec=None) -> PadicScalar:
    """Inverse; exact inputs with a unit other than +-1 need ``abs_prec``."""
    if x.is_zero:
        raise DivisionByZero("inverse of a certified zero")
    v = x.valuation
    if x.is_exact:
        if x.unit in (1, -1):
            return PadicScalar(x.p, -v, x.unit, INF)
        if abs_prec is None:
            raise PrecisionExhausted("inverse of an exact non-trivial unit needs abs_prec")
        rel = abs_prec + v
    else:
        rel = x.abs_prec - v
        if abs_prec is not None:
            rel = min(rel, abs_prec + v)
    if rel <= 0:
        return PadicScalar.zero(x.p, rel - v)
    u = pow(x.unit, -1, x.p**rel)
    return PadicScalar._normalize(x.p, u, -v, rel - v)


# -- text form "u*p^v + O(p^N)" -------------------------------------------

def format_scalar(x: PadicScalar) -> str:
    p = x.p
    tail = "" if x.is_exact else f"O({p}^{x.abs_prec})"
    if x.is_zero:
        return tail or "0"
    head = f"{x.unit}*{p}^{x.valuation}"
    return f"{head} + {tail}" if tail else head


_SCALAR_RE = re.compile(
    r"^\s*(?:(?P<u>-?\d+)\*(?P<p1>\d+)\^(?P<v>-?\d+))?\s*"
    r"(?:(?P<plus>\+)?\s*O\((?P<p2>\d+)\^(?P<n>-?\d+)\))?\s*$"
)


def parse_scalar(text: str, p: int) -> PadicScalar:
    """Inverse of :func:`format_scalar`."""
    if text.strip() == "0":
        return PadicScalar.zero(p)
    m = _SCALAR_RE.match(text)
    if not m or (m.group("u") is None and m.group("n") is None):
        raise ValueError(f"cannot parse p-adic scalar {text!r}")
    for key in ("p1", "p2"):
        if m.group(key) is not None and int(m.group(key)) != p:
            raise ValueError(f"prime mismatch in {text!r}")
    prec = INF if m.group("n") is None else int(m.group("n"))
    if m.group("u") is None:
        return PadicScalar.zero(p, prec)
    return PadicScalar(p, int(m.group("v")), int(m.group("u")), prec)
