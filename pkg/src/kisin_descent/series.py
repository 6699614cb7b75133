"""Precision-certified power series on the disc |u| <= p^(-1/m).

A :class:`DiscSeries` is a polynomial of degree <= ``degree`` with exact
coefficients ``num[i] / p**den`` together with a set of
:class:`HvCertificate` records.  The true element equals the stored
polynomial plus a sum of unknown terms, one per certificate, each lying in
``H_bound`` and vanishing to order ``u_order`` at ``u = 0``.

Valuations are the Gauss valuation ``v_R(sum a_i u^i) = min(i + m*v_p(a_i))``.
Every certificate is a lower bound, so a stored valuation below ``vfloor``
is the true valuation and anything at or above it is only known to be
``>= vfloor``.

``prec`` is the rounding target in v_R units: coefficient ``i`` is kept
modulo ``p**ceil((prec - i)/m)``.  Rounding that changes a coefficient adds
a certificate at ``prec``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import (InsufficientDegree, MonomialDivisionFailure, NotAUnit,
                     ParameterMismatch, PrecisionExhausted)
from .scalar import INF, PadicScalar, split_int, vp_int

try:  # GMP multiplication is an order of magnitude faster on packed products
    from gmpy2 import mpz as _bigint
except ImportError:  # pragma: no cover
    _bigint = int

MAX_CERTS = 6


@dataclass(frozen=True, order=True)
class HvCertificate:
    """Membership in ``H_bound`` intersected with ``u**u_order * R``."""

    bound: int | float
    u_order: int | float

    def frobenius(self, p: int) -> "HvCertificate":
        # f in H_v and u^j R  =>  phi(f) in H_{v + j(p-1)} and u^{pj} R
        return HvCertificate(self.bound + self.u_order * (p - 1), self.u_order * p)


@lru_cache(maxsize=4096)
def _ppow(p: int, e: int) -> int:
    return p**e


def _prune(certs):
    pairs = sorted({(c.bound, c.u_order) for c in certs if c.bound != INF})
    keep = []
    for b, o in pairs:
        if any(o2 <= o for _, o2 in keep):
            continue
        keep.append((b, o))
    while len(keep) > MAX_CERTS:
        (b1, _), (_, o2) = keep[-2], keep[-1]
        keep[-2:] = [(b1, o2)]
    return tuple(HvCertificate(b, o) for b, o in keep)


def _pack(cs, nb):
    pos = b"".join((c if c > 0 else 0).to_bytes(nb, "little") for c in cs)
    n = int.from_bytes(pos, "little")
    if any(c < 0 for c in cs):
        neg = b"".join((-c if c < 0 else 0).to_bytes(nb, "little") for c in cs)
        n -= int.from_bytes(neg, "little")
    return n


def _kmul(a, b):
    """Product of integer polynomials via Kronecker substitution."""
    ma = max(abs(x) for x in a)
    mb = max(abs(x) for x in b)
    n = len(a) + len(b) - 1
    if ma == 0 or mb == 0:
        return [0] * n
    if len(a) * len(b) <= 64:
        out = [0] * n
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    out[i + j] += x * y
        return out
    bound = ma * mb * min(len(a), len(b))
    nb = (bound.bit_length() + 9) // 8
    prod = int(_bigint(_pack(a, nb)) * _bigint(_pack(b, nb)))
    half = 1 << (8 * nb - 1)
    bias = int.from_bytes((b"\x00" * (nb - 1) + b"\x80") * n, "little")
    data = (prod + bias).to_bytes(n * nb, "little")
    return [int.from_bytes(data[i * nb:(i + 1) * nb], "little") - half for i in range(n)]


def _trim(num):
    k = len(num)
    while k and not num[k - 1]:
        k -= 1
    return num[:k]


def _term_vR(i, c, den, p, m):
    return i + m * (vp_int(c, p) - den)


def _min_vR(items, den, p, m):
    """Minimum of ``i + m*(v_p(c) - den)`` over ``(i, c)`` pairs in degree order."""
    best = INF
    for i, c in items:
        if not c:
            continue
        if i - m * den >= best:
            break
        if best != INF:
            # the term beats best only if v_p(c) < k
            k = den - ((i - best) // m)
            if c % _ppow(p, k) == 0:
                continue
        best = min(best, _term_vR(i, c, den, p, m))
    return best


class DiscSeries:
    """Element of ``R = O_{[0, p^(-1/m)]}`` known up to certified error."""

    __slots__ = ("p", "m", "degree", "_num", "_den", "prec", "certs", "_vr", "_ord")

    def __init__(self, p, m, degree, num, den, prec, certs):
        # callers go through _finish(); this just stores
        self.p = p
        self.m = m
        self.degree = degree
        self._num = num
        self._den = den
        self.prec = prec
        self.certs = certs
        self._vr = None
        self._ord = None

    # -- construction ------------------------------------------------------

    @classmethod
    def _finish(cls, p, m, degree, num, den, prec, certs=()):
        certs = list(certs)
        num = list(num)
        if len(num) > degree + 1:
            dropped = [(i, c) for i, c in enumerate(num[degree + 1:], degree + 1) if c]
            if dropped:
                certs.append(HvCertificate(_min_vR(dropped, den, p, m), dropped[0][0]))
            del num[degree + 1:]
        elif len(num) < degree + 1:
            num.extend([0] * (degree + 1 - len(num)))
        if prec != INF:
            changed = None
            for i, c in enumerate(num):
                if not c:
                    continue
                e = den - ((i - prec) // m)  # den + ceil((prec - i)/m)
                if e <= 0:
                    num[i] = 0
                else:
                    mod = _ppow(p, e)
                    r = c % mod
                    if r > mod >> 1:
                        r -= mod
                    if r == c:
                        continue
                    num[i] = r
                if changed is None:
                    changed = i
            if changed is not None:
                certs.append(HvCertificate(prec, changed))
        if den > 0:
            g = 0
            for c in num:
                if c:
                    g = math.gcd(g, c)
                    if g == 1:
                        break
            if g == 0:
                den = 0
            elif g % p == 0:
                s = min(vp_int(g, p), den)
                if s:
                    q = _ppow(p, s)
                    num = [c // q for c in num]
                    den -= s
        return cls(p, m, degree, tuple(num), den, prec, _prune(certs))

    @classmethod
    def from_coefficients(cls, p, coeffs, *, m=None, degree=None, prec=INF, certs=()):
        """Series from ints, Fractions (p-power denominators) or PadicScalars.

        An inexact PadicScalar at degree ``i`` contributes the certificate
        ``(i + m*abs_prec, i)``.
        """
        m = p if m is None else m
        coeffs = list(coeffs)
        degree = max(len(coeffs) - 1, 0) if degree is None else degree
        certs = list(certs)
        fracs = []
        for i, c in enumerate(coeffs):
            if isinstance(c, PadicScalar):
                if c.p != p:
                    raise ParameterMismatch("coefficient over a different prime")
                if not c.is_exact:
                    certs.append(HvCertificate(i + m * c.abs_prec, i))
                fracs.append(c.to_fraction())
            else:
                fracs.append(Fraction(c))
        den = 0
        for q in fracs:
            if q.denominator != 1:
                vd, ud = split_int(q.denominator, p)
                if ud != 1:
                    raise ValueError(f"denominator of {q} is not a power of {p}")
                den = max(den, vd)
        scale = p**den
        num = [int(q * scale) for q in fracs]
        return cls._finish(p, m, degree, num, den, prec, certs)

    @classmethod
    def zero(cls, p, *, m=None, degree=0, prec=INF):
        return cls._finish(p, p if m is None else m, degree, [], 0, prec)

    @classmethod
    def monomial(cls, p, i, c=1, *, m=None, degree=None, prec=INF):
        degree = i if degree is None else degree
        return cls.from_coefficients(p, [0] * i + [c], m=m, degree=degree, prec=prec)

    def like(self, coeffs, certs=()):
        """New series with this series' parameters."""
        return DiscSeries.from_coefficients(self.p, coeffs, m=self.m, degree=self.degree,
                                            prec=self.prec, certs=certs)

    def with_certs(self, extra):
        return DiscSeries(self.p, self.m, self.degree, self._num, self._den, self.prec,
                          _prune(self.certs + tuple(extra)))

    # -- queries -----------------------------------------------------------

    @property
    def weight_m(self):
        return self.m

    def stored_valuation(self):
        """Exact v_R of the stored polynomial (inf when it is zero)."""
        if self._vr is None:
            best = _min_vR(enumerate(self._num), self._den, self.p, self.m)
            self._vr = best
        return self._vr

    def stored_order(self):
        if self._ord is None:
            self._ord = next((i for i, c in enumerate(self._num) if c), INF)
        return self._ord

    @property
    def vfloor(self):
        """Certified lower bound for v_R of everything not stored."""
        return min((c.bound for c in self.certs), default=INF)

    @property
    def tail_bound(self):
        return min((c.bound for c in self.certs if c.u_order > self.degree), default=INF)

    @property
    def coeff_prec(self):
        b = min((c.bound for c in self.certs if c.u_order <= self.degree), default=INF)
        return b if b == INF else Fraction(b, self.m)

    def valuation(self):
        """Certified lower bound for v_R; exact when below ``vfloor``."""
        return min(self.stored_valuation(), self.vfloor)

    def valuation_is_exact(self):
        return self.stored_valuation() < self.vfloor

    def u_order(self):
        return min([self.stored_order()] + [c.u_order for c in self.certs])

    def certificate(self) -> HvCertificate:
        return HvCertificate(self.valuation(), self.u_order())

    @property
    def is_zero(self):
        """Stored part is zero and nothing unknown remains."""
        return not self.certs and self.stored_order() == INF

    def is_polynomial(self):
        return self.tail_bound == INF

    def coeff_fraction(self, i) -> Fraction:
        if i > self.degree:
            return Fraction(0)
        return Fraction(self._num[i], self.p**self._den)

    def fractions(self):
        return [self.coeff_fraction(i) for i in range(self.degree + 1)]

    def coeff_abs_prec(self, i):
        """Absolute p-adic precision to which coefficient ``i`` is certified."""
        out = INF
        for c in self.certs:
            if c.u_order <= i:
                out = min(out, -((i - c.bound) // self.m))
        return out

    def coeff(self, i) -> PadicScalar:
        if i > self.degree and self.tail_bound != INF:
            raise InsufficientDegree(f"degree {i} is beyond the stored degree {self.degree}")
        prec = self.coeff_abs_prec(i)
        q = self.coeff_fraction(i)
        if q == 0:
            return PadicScalar.zero(self.p, prec)
        vn, un = split_int(q.numerator, self.p)
        vd = vp_int(q.denominator, self.p)
        v = vn - vd
        if v >= prec:
            return PadicScalar.zero(self.p, prec)
        if prec != INF:
            un %= self.p ** (prec - v)
        return PadicScalar(self.p, v, un, prec)

    @property
    def coeffs(self):
        return tuple(self.coeff(i) for i in range(self.degree + 1))

    def poly_degree(self):
        """Degree of the stored polynomial (-1 for zero)."""
        return len(_trim(self._num)) - 1

    # -- arithmetic --------------------------------------------------------

    def _check(self, other):
        if not isinstance(other, DiscSeries):
            raise TypeError(f"expected DiscSeries, got {type(other).__name__}")
        if other.p != self.p or other.m != self.m:
            raise ParameterMismatch("series over different discs")

    def __add__(self, other):
        if not isinstance(other, DiscSeries):
            return series_add(self, self.like([other]))
        return series_add(self, other)

    __radd__ = __add__

    def __neg__(self):
        return DiscSeries(self.p, self.m, self.degree, tuple(-c for c in self._num),
                          self._den, self.prec, self.certs)

    def __sub__(self, other):
        if not isinstance(other, DiscSeries):
            other = self.like([other])
        return series_add(self, -other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, DiscSeries):
            return series_mul(self, other)
        return scale(self, other)

    __rmul__ = __mul__

    def __pow__(self, n):
        return power(self, n)

    def __str__(self):
        return format_series(self)

    def __repr__(self):
        return f"DiscSeries({pretty(self)!r})"

    def __eq__(self, other):
        if not isinstance(other, DiscSeries):
            return NotImplemented
        return (self.p, self.m, self.degree, self._num, self._den, self.prec, self.certs) == \
            (other.p, other.m, other.degree, other._num, other._den, other.prec, other.certs)

    def __hash__(self):
        return hash((self.p, self._num, self._den, self.certs))


def _align(f, g):
    den = max(f._den, g._den)
    a = f._num if f._den == den else tuple(c * f.p ** (den - f._den) for c in f._num)
    b = g._num if g._den == den else tuple(c * g.p ** (den - g._den) for c in g._num)
    return a, b, den


def series_add(f: DiscSeries, g: DiscSeries) -> DiscSeries:
    f._check(g)
    a, b, den = _align(f, g)
    n = max(len(a), len(b))
    num = [(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)]
    return DiscSeries._finish(f.p, f.m, min(f.degree, g.degree), num, den,
                              min(f.prec, g.prec), f.certs + g.certs)


def series_mul(f: DiscSeries, g: DiscSeries) -> DiscSeries:
    f._check(g)
    p, m = f.p, f.m
    vf, of = f.stored_valuation(), f.stored_order()
    vg, og = g.stored_valuation(), g.stored_order()
    certs = []
    if vg != INF:
        certs += [HvCertificate(c.bound + vg, c.u_order + og) for c in f.certs]
    if vf != INF:
        certs += [HvCertificate(c.bound + vf, c.u_order + of) for c in g.certs]
    certs += [HvCertificate(c.bound + d.bound, c.u_order + d.u_order)
              for c in f.certs for d in g.certs]
    a, b = _trim(f._num), _trim(g._num)
    num = _kmul(a, b) if a and b else []
    return DiscSeries._finish(p, m, min(f.degree, g.degree), num, f._den + g._den,
                              min(f.prec, g.prec), certs)


def scale(f: DiscSeries, c) -> DiscSeries:
    """Multiply by a constant (int, Fraction or PadicScalar)."""
    if not isinstance(c, PadicScalar):
        q = Fraction(c)
        if q == 0:
            return DiscSeries.zero(f.p, m=f.m, degree=f.degree, prec=f.prec)
        c = PadicScalar.make(f.p, q)
    p, m = f.p, f.m
    certs = []
    if not c.is_exact:
        vf = f.valuation()
        if vf != INF:
            certs.append(HvCertificate(vf + m * c.abs_prec, f.u_order()))
    if c.is_zero:
        return DiscSeries._finish(p, m, f.degree, [], 0, f.prec, certs)
    v = c.valuation
    certs += [HvCertificate(d.bound + m * v, d.u_order) for d in f.certs]
    num = [x * c.unit for x in f._num]
    den = f._den
    if v >= 0:
        q = p**v
        num = [x * q for x in num]
    else:
        den += -v
    return DiscSeries._finish(p, m, f.degree, num, den, f.prec, certs)


def power(f: DiscSeries, n: int) -> DiscSeries:
    if n < 0:
        return power(invert_unit(f), -n)
    result = f.like([1])
    base = f
    while n:
        if n & 1:
            result = result * base
        n >>= 1
        if n:
            base = base * base
    return result


def frobenius(f: DiscSeries) -> DiscSeries:
    """``u -> u^p``; coefficients are fixed because the base field is Q_p."""
    p, m, D = f.p, f.m, f.degree
    num = [0] * (D + 1)
    over = []
    for i, c in enumerate(f._num):
        if c:
            if p * i <= D:
                num[p * i] = c
            else:
                over.append(_term_vR(p * i, c, f._den, p, m))
    certs = [c.frobenius(p) for c in f.certs]
    if over:
        first = next(p * i for i, c in enumerate(f._num) if c and p * i > D)
        certs.append(HvCertificate(min(over), first))
    return DiscSeries._finish(p, m, D, num, f._den, f.prec, certs)


def derivative(f: DiscSeries) -> DiscSeries:
    num = [(i + 1) * c for i, c in enumerate(f._num[1:])]
    certs = [HvCertificate(c.bound - 1, max(c.u_order - 1, 0)) for c in f.certs]
    return DiscSeries._finish(f.p, f.m, f.degree, num, f._den, f.prec - 1, certs)


def truncate_le(f: DiscSeries, n: int) -> DiscSeries:
    """Polynomial part of degree <= n."""
    if n > f.degree and f.tail_bound != INF:
        raise InsufficientDegree(f"T<={n} needs degree {n}, have {f.degree}")
    num = list(f._num[:n + 1]) if n >= 0 else []
    certs = [c for c in f.certs if c.u_order <= n]
    return DiscSeries._finish(f.p, f.m, f.degree, num, f._den, f.prec, certs)


def truncate_lt(f: DiscSeries, n: int) -> DiscSeries:
    return truncate_le(f, n - 1)


def truncate_gt(f: DiscSeries, n: int) -> DiscSeries:
    """``f - T<=n(f)``; keeps the tail certificates."""
    k = max(n + 1, 0)
    num = [0] * min(k, len(f._num)) + list(f._num[k:])
    certs = [HvCertificate(c.bound, max(c.u_order, k)) for c in f.certs]
    return DiscSeries._finish(f.p, f.m, f.degree, num, f._den, f.prec, certs)


def truncate_ge(f: DiscSeries, n: int) -> DiscSeries:
    return truncate_gt(f, n - 1)


def shift_up(f: DiscSeries, a: int) -> DiscSeries:
    """Multiply by ``u**a``."""
    certs = [HvCertificate(c.bound + a, c.u_order + a) for c in f.certs]
    return DiscSeries._finish(f.p, f.m, f.degree, [0] * a + list(f._num), f._den,
                              f.prec, certs)


def divide_by_u(f: DiscSeries, a: int) -> DiscSeries:
    """Exact division by ``u**a`` as an index shift.

    Every stored coefficient below degree ``a`` must vanish and every
    certificate must have u-order at least ``a``.
    """
    if a == 0:
        return f
    if any(f._num[:a]):
        raise MonomialDivisionFailure(f"stored coefficients below u^{a} are nonzero")
    bad = [c for c in f.certs if c.u_order < a]
    if bad:
        raise MonomialDivisionFailure(f"error term of order {bad[0].u_order} < {a}")
    certs = [HvCertificate(c.bound - a, c.u_order - a) for c in f.certs]
    return DiscSeries._finish(f.p, f.m, f.degree, list(f._num[a:]), f._den, f.prec, certs)


def invert_unit(f: DiscSeries) -> DiscSeries:
    """Inverse of ``c*(1+g)`` with ``v_R(g) > 0`` by the geometric series.

    The sum is taken in product form ``prod (1 + x^(2^i))``; the omitted
    remainder ``x^K/(1+g)`` is recorded as a certificate at ``K*v_R(g)``.
    """
    c = f.coeff(0)
    if c.is_zero:
        raise NotAUnit("constant term is not certified nonzero")
    if c.is_exact and c.unit not in (1, -1):
        if f.prec == INF:
            raise PrecisionExhausted("inverting a non-trivial exact unit needs finite prec")
        cinv = c.inverse(abs_prec=-(-f.prec // f.m) + f._den + 1 - c.valuation)
    else:
        cinv = c.inverse()
    g = scale(f, cinv) - 1
    vg = g.valuation()
    if vg <= 0:
        raise NotAUnit(f"v_R(f/c - 1) = {vg} is not positive")
    if vg == INF:
        return f.like([cinv])
    og = g.u_order()
    target = min(f.prec, f.vfloor)
    if target == INF:
        if og < 1:
            raise PrecisionExhausted("exact inverse needs finite precision")
        k_needed = f.degree // og + 1
    else:
        k_needed = max(math.ceil(target / vg), 1)
    x = -g
    s = f.like([1])
    xpow = x
    k = 1
    while k < k_needed:
        s = s * (1 + xpow)
        xpow = xpow * xpow
        k *= 2
    s = s.with_certs([HvCertificate(k * vg, k * og)])
    return scale(s, cinv)


def vR(f: DiscSeries):
    """Certified lower bound for the Gauss valuation of ``f``."""
    return f.valuation()


# -- lambda products --------------------------------------------------------

@dataclass(frozen=True)
class LambdaSeries:
    """E = u + p and the products of Frobenius twists of E/p."""

    p: int
    degree: int
    prec: int | float
    E: DiscSeries
    lam_plus: DiscSeries
    lam_minus: DiscSeries
    lam_pp: DiscSeries
    lam: DiscSeries

    @property
    def m(self):
        return self.E.m

    @property
    def u(self):
        return DiscSeries.monomial(self.p, 1, m=self.m, degree=self.degree, prec=self.prec)

    def one(self):
        return self.E.like([1])

    def zero(self):
        return self.E.like([])


def _lambda_product(p, m, degree, prec, exponents):
    """Product of ``1 + u^(p^j)/p`` over the given j, with tail certificate."""
    one = DiscSeries.from_coefficients(p, [1], m=m, degree=degree, prec=prec)
    out = one
    omitted = None
    for j in exponents:
        d = p**j
        if d > degree:
            omitted = d
            break
        out = out * (one + DiscSeries.monomial(p, d, Fraction(1, p), m=m, degree=degree,
                                               prec=prec))
    if omitted is not None:
        # the omitted factors multiply to 1 + y with y in H_{p^j - m} and u^{p^j} R
        out = out.with_certs([HvCertificate(out.stored_valuation() + omitted - m, omitted)])
    return out


def lambda_factory(p: int, degree: int, N, *, m=None) -> LambdaSeries:
    """Build E, lambda_+, lambda_-, lambda_++ and lambda at working degree/precision.

    ``N`` is the coefficient precision in p-adic digits; the rounding target is
    ``m*N`` in v_R units.
    """
    m = p if m is None else m
    prec = INF if N == INF else m * N
    big = range(0, 64)
    E = DiscSeries.from_coefficients(p, [p, 1], m=m, degree=degree, prec=prec)
    lam_plus = _lambda_product(p, m, degree, prec, (j for j in big if j % 2 == 0))
    lam_minus = _lambda_product(p, m, degree, prec, (j for j in big if j % 2 == 1))
    lam_pp = _lambda_product(p, m, degree, prec, (j for j in big if j % 2 == 0 and j))
    lam = _lambda_product(p, m, degree, prec, big)
    return LambdaSeries(p, degree, prec, E, lam_plus, lam_minus, lam_pp, lam)


# -- text formats -----------------------------------------------------------

def _rat(x):
    if x == INF:
        return "inf"
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _parse_rat(s):
    return INF if s == "inf" else Fraction(s)


def _as_int_if_whole(x):
    if x == INF:
        return INF
    x = Fraction(x)
    return int(x) if x.denominator == 1 else x


def format_series(f: DiscSeries) -> str:
    """Canonical text: ``(u*p^v) + (u*p^v)*u^i + ... + O(u^{D+1}; p^N; m=M) + H(b; u^o)``."""
    p = f.p
    parts = []
    for i, c in enumerate(f._num):
        if c:
            v, unit = split_int(c, p)
            body = f"({unit}*{p}^{v - f._den})"
            parts.append(body if i == 0 else f"{body}*u^{i}")
    N = f.prec if f.prec == INF else Fraction(f.prec, f.m)
    parts.append(f"O(u^{f.degree + 1}; {p}^{_rat(N)}; m={f.m})")
    parts.extend(f"H({_rat(c.bound)}; u^{_rat(c.u_order)})" for c in f.certs)
    return " + ".join(parts)


_TERM_RE = re.compile(r"^\((-?\d+)\*(\d+)\^(-?\d+)\)(?:\*u\^(\d+))?$")
_O_RE = re.compile(r"^O\(u\^(\d+); (\d+)\^([-\d/inf]+); m=(\d+)\)$")
_H_RE = re.compile(r"^H\(([-\d/inf]+); u\^([-\d/inf]+)\)$")


def parse_series(text: str) -> DiscSeries:
    """Inverse of :func:`format_series`."""
    terms, trailer, certs = {}, None, []
    for piece in text.strip().split(" + "):
        piece = piece.strip()
        if (mt := _TERM_RE.match(piece)):
            i = int(mt.group(4) or 0)
            terms[i] = (int(mt.group(1)), int(mt.group(2)), int(mt.group(3)))
        elif (mo := _O_RE.match(piece)):
            trailer = mo
        elif (mh := _H_RE.match(piece)):
            certs.append(HvCertificate(_as_int_if_whole(_parse_rat(mh.group(1))),
                                       _as_int_if_whole(_parse_rat(mh.group(2)))))
        else:
            raise ValueError(f"cannot parse series term {piece!r}")
    if trailer is None:
        raise ValueError("missing O(...) trailer")
    degree = int(trailer.group(1)) - 1
    p = int(trailer.group(2))
    m = int(trailer.group(4))
    N = _parse_rat(trailer.group(3))
    prec = INF if N == INF else _as_int_if_whole(N * m)
    den = max([-v for (_, q, v) in terms.values() if v < 0], default=0)
    num = [0] * (degree + 1)
    for i, (unit, q, v) in terms.items():
        if q != p:
            raise ValueError("prime mismatch")
        num[i] = unit * p ** (v + den)
    return DiscSeries(p, m, degree, tuple(num), den, prec, _prune(certs))


def pretty(f: DiscSeries, var="u") -> str:
    """Human-readable rational form such as ``1 + u^3/3 + u^27/3``."""
    out = []
    for i, q in enumerate(f.fractions()):
        if q == 0:
            continue
        mono = "" if i == 0 else (var if i == 1 else f"{var}^{i}")
        n, d = abs(q.numerator), q.denominator
        if not mono:
            body = str(n) if d == 1 else f"{n}/{d}"
        else:
            body = mono if n == 1 else f"{n}*{mono}"
            if d != 1:
                body += f"/{d}"
        out.append(("-" if q < 0 else "+", body))
    if not out:
        return "0"
    text = ("-" if out[0][0] == "-" else "") + out[0][1]
    for sign, body in out[1:]:
        text += f" {sign} {body}"
    return text


def rational_str(x) -> str:
    """Exact rational as text: ``"7"``, ``"5/2"`` or ``"inf"``."""
    return _rat(x)


def coefficient_record(f: DiscSeries, i: int) -> dict:
    c = f.coeff(i)
    return {
        "degree": i,
        "valuation": None if c.is_zero else c.valuation,
        "unit": c.unit,
        "prec": _rat(c.abs_prec),
    }


def series_to_dict(f: DiscSeries) -> dict:
    """JSON-ready record: nonzero coefficients plus the certificate list."""
    return {
        "p": f.p,
        "m": f.m,
        "degree": f.degree,
        "prec": _rat(f.prec),
        "coefficients": [coefficient_record(f, i) for i, c in enumerate(f._num) if c],
        "certificates": [{"bound": _rat(c.bound), "u_order": _rat(c.u_order)}
                         for c in f.certs],
    }
