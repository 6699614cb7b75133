"""2x2 matrices over :class:`DiscSeries`, twisted conjugation and monodromy."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import NotAUnit, ParameterMismatch
from .scalar import INF
from .series import (DiscSeries, LambdaSeries, derivative, format_series, frobenius,
                     invert_unit, lambda_factory, parse_series, series_to_dict, shift_up)


@dataclass(frozen=True)
class SeriesMatrix2:
    c11: DiscSeries
    c12: DiscSeries
    c21: DiscSeries
    c22: DiscSeries

    def __post_init__(self):
        ref = self.c11
        for f in self.entries():
            if f.p != ref.p or f.m != ref.m:
                raise ParameterMismatch("matrix entries over different discs")

    @classmethod
    def of(cls, rows):
        (a, b), (c, d) = rows
        return cls(a, b, c, d)

    @classmethod
    def identity(cls, like: DiscSeries):
        return cls(like.like([1]), like.like([]), like.like([]), like.like([1]))

    @classmethod
    def diag(cls, a: DiscSeries, d: DiscSeries):
        return cls(a, a.like([]), d.like([]), d)

    def entries(self):
        return (self.c11, self.c12, self.c21, self.c22)

    def rows(self):
        return ((self.c11, self.c12), (self.c21, self.c22))

    def __getitem__(self, ij):
        i, j = ij
        return self.rows()[i - 1][j - 1]

    def replace(self, ij, value):
        e = list(self.entries())
        e[2 * (ij[0] - 1) + ij[1] - 1] = value
        return SeriesMatrix2(*e)

    def map(self, fn):
        return SeriesMatrix2(*(fn(f) for f in self.entries()))

    @property
    def p(self):
        return self.c11.p

    @property
    def m(self):
        return self.c11.m

    @property
    def degree(self):
        return min(f.degree for f in self.entries())

    @property
    def vfloor(self):
        return min(f.vfloor for f in self.entries())

    def at_zero(self):
        """Constant terms as a 2x2 tuple of PadicScalars."""
        return tuple(tuple(f.coeff(0) for f in row) for row in self.rows())

    def __add__(self, other):
        return mat_add(self, other)

    def __sub__(self, other):
        return mat_add(self, -other)

    def __neg__(self):
        return self.map(lambda f: -f)

    def __matmul__(self, other):
        return mat_mul(self, other)

    def __mul__(self, c):
        return self.map(lambda f: f * c)

    __rmul__ = __mul__

    def __str__(self):
        return format_matrix(self)


def mat_add(X: SeriesMatrix2, Y: SeriesMatrix2) -> SeriesMatrix2:
    return SeriesMatrix2(*(a + b for a, b in zip(X.entries(), Y.entries())))


def mat_mul(X: SeriesMatrix2, Y: SeriesMatrix2) -> SeriesMatrix2:
    return SeriesMatrix2(
        X.c11 * Y.c11 + X.c12 * Y.c21, X.c11 * Y.c12 + X.c12 * Y.c22,
        X.c21 * Y.c11 + X.c22 * Y.c21, X.c21 * Y.c12 + X.c22 * Y.c22)


def mat_frobenius(X: SeriesMatrix2) -> SeriesMatrix2:
    return X.map(frobenius)


def mat_vR(X: SeriesMatrix2):
    """Minimum of the certified entry valuations."""
    return min(f.valuation() for f in X.entries())


def det(X: SeriesMatrix2) -> DiscSeries:
    return X.c11 * X.c22 - X.c12 * X.c21


def adjugate(X: SeriesMatrix2) -> SeriesMatrix2:
    return SeriesMatrix2(X.c22, -X.c12, -X.c21, X.c11)


def mat_inverse(X: SeriesMatrix2) -> SeriesMatrix2:
    """Inverse when the determinant is a unit of R."""
    try:
        dinv = invert_unit(det(X))
    except NotAUnit as exc:
        raise NotAUnit(f"matrix is not invertible in the supported shape: {exc}") from exc
    return adjugate(X).map(lambda f: f * dinv)


def twisted_conjugate(A: SeriesMatrix2, C: SeriesMatrix2) -> SeriesMatrix2:
    """``A C phi(A)^-1``."""
    return mat_mul(mat_mul(A, C), mat_inverse(mat_frobenius(A)))


# -- monodromy ---------------------------------------------------------------

def n_nabla(f: DiscSeries, lams: LambdaSeries) -> DiscSeries:
    """The derivation ``-u * lambda * d/du``."""
    return -shift_up(lams.lam * derivative(f), 1)


def mat_n_nabla(X: SeriesMatrix2, lams: LambdaSeries) -> SeriesMatrix2:
    return X.map(lambda f: n_nabla(f, lams))


def monodromy_B_from(lams: LambdaSeries, h: int) -> SeriesMatrix2:
    """``diag(h u lambda_+ lambda_-', h u lambda_- lambda_+')``."""
    b11 = shift_up(lams.lam_plus * derivative(lams.lam_minus), 1) * h
    b22 = shift_up(lams.lam_minus * derivative(lams.lam_plus), 1) * h
    return SeriesMatrix2.diag(b11, b22)


def monodromy_B(h: int, p: int, D: int, N, *, m=None) -> SeriesMatrix2:
    return monodromy_B_from(lambda_factory(p, D, N, m=m), h)


@dataclass(frozen=True)
class Residual:
    """Outcome of a monodromy-relation check.

    ``stored`` is the valuation of the computed residual; ``floor`` is the
    certified precision floor.  The relation holds at working precision
    when ``stored >= floor``.
    """

    matrix: SeriesMatrix2
    stored: float
    floor: float

    @property
    def value(self):
        return min(self.stored, self.floor)

    @property
    def holds(self):
        return self.stored >= self.floor


def lambdas_for(X: SeriesMatrix2) -> LambdaSeries:
    f = X.c11
    N = INF if f.prec == INF else f.prec / f.m
    return lambda_factory(f.p, X.degree, N, m=f.m)


def monodromy_residual(C: SeriesMatrix2, B: SeriesMatrix2, lams: LambdaSeries = None) -> Residual:
    """``N(C) + B C - (p/c_0) E C phi(B)`` with ``c_0 = E(0) = p``."""
    lams = lams or lambdas_for(C)
    c0 = lams.E.coeff(0)
    factor = c0.inverse() * lams.p  # exact: c0 = p
    lhs = mat_n_nabla(C, lams) + mat_mul(B, C)
    rhs = mat_mul(C, mat_frobenius(B)).map(lambda f: (lams.E * f) * factor)
    res = lhs - rhs
    stored = min(f.stored_valuation() for f in res.entries())
    return Residual(res, stored, res.vfloor)


def change_of_basis_B(A: SeriesMatrix2, B: SeriesMatrix2, lams: LambdaSeries) -> SeriesMatrix2:
    """Matrix of N in the basis ``e A^-1``-transformed by ``C -> A *_phi C``.

    If the old basis satisfies ``N(e) = e B`` and ``e' = e A^-1`` then
    ``B' = A B A^-1 - N(A) A^-1``.
    """
    Ainv = mat_inverse(A)
    return mat_mul(mat_mul(A, B), Ainv) - mat_mul(mat_n_nabla(A, lams), Ainv)


# -- text / JSON ---------------------------------------------------------------

_LABELS = ("c11", "c12", "c21", "c22")


def format_matrix(X: SeriesMatrix2) -> str:
    return "\n".join(f"{k}: {format_series(f)}" for k, f in zip(_LABELS, X.entries()))


def parse_matrix(text: str) -> SeriesMatrix2:
    found = {}
    for line in text.strip().splitlines():
        key, _, body = line.partition(": ")
        if key not in _LABELS:
            raise ValueError(f"unexpected matrix block {key!r}")
        found[key] = parse_series(body)
    return SeriesMatrix2(*(found[k] for k in _LABELS))


def matrix_to_json(X: SeriesMatrix2):
    return [[series_to_dict(f) for f in row] for row in X.rows()]
