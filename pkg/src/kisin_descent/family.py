"""The family ``C_ap = (a_p (lambda_-/lambda_++)^h, -1; E^h, 0)`` and its descent.

``run_family_descent`` brings ``C_ap`` to the shape ``(P, -1; E^h, 0)`` with
``P`` a polynomial, and ``integral_descent`` does so with ``P in pZ_p[u]``
when ``v_p(a_p) > floor(h/p)`` and ``h >= 2p``, so the matrix reduces to
``(0, -1; u^h, 0)`` modulo p.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from fractions import Fraction

from .descent import (DescentParams, DescentResult, default_stop_floor, descend, oracle_check,
                      shape_split)
from .errors import (CheckFailure, IndeterminateAtPrecision, NotIntegral,
                     ParameterViolation, PrecisionExhausted, PreconditionViolation)
from .matrix import SeriesMatrix2, mat_vR, monodromy_B_from, monodromy_residual
from .scalar import INF, PadicScalar, is_prime
from .series import (DiscSeries, LambdaSeries, invert_unit, lambda_factory, rational_str,
                     truncate_le)

MAX_DEGREE_ENV = "KISIN_MAX_DEGREE"


def default_degree(p: int, h: int) -> int:
    """Room for at least two nontrivial factors of each lambda product."""
    return 4 * max(h, p**3) + 1


def default_digits(p: int, degree: int, m: int) -> int:
    """Coefficient precision (p-adic digits) so ``m*N`` sits just above ``degree``."""
    return degree // m + 5


@dataclass(frozen=True)
class FamilyInstance:
    p: int
    h: int
    a_p: PadicScalar
    a_prime: Fraction
    D: int
    N: int
    m: int

    def __post_init__(self):
        if not is_prime(self.p):
            raise ParameterViolation(f"p = {self.p} is not prime")
        if self.h < 1:
            raise ParameterViolation("h must be a positive integer")
        if self.a_p.p != self.p:
            raise ParameterViolation("a_p is over a different prime")
        if not self.a_p.is_zero and self.a_p.valuation <= 0:
            raise ParameterViolation("a_p must have positive valuation")
        if self.a_prime > Fraction(self.h, 2):
            raise ParameterViolation("a' must be at most h/2")
        if not self.p * self.v_ap > self.a_prime:
            raise ParameterViolation("p * v_p(a_p) must exceed a'")

    @classmethod
    def make(cls, p, h, a_p, *, a_prime=None, D=None, N=None, m=None):
        if not isinstance(a_p, PadicScalar):
            a_p = PadicScalar.make(p, a_p)
        m = p if m is None else m
        a_prime = Fraction(h, 2) if a_prime is None else Fraction(a_prime)
        D = default_degree(p, h) if D is None else D
        N = default_digits(p, D, m) if N is None else N
        return cls(p, h, a_p, a_prime, D, N, m)

    @property
    def v_ap(self):
        return INF if self.a_p.is_zero else self.a_p.valuation

    @property
    def gamma(self):
        return min(self.p * self.v_ap - self.a_prime, self.p - 1)

    def lambdas(self) -> LambdaSeries:
        return lambda_factory(self.p, self.D, self.N, m=self.m)

    def to_dict(self):
        return {"p": self.p, "h": self.h,
                "ap": {"valuation": None if self.a_p.is_zero else self.a_p.valuation,
                       "unit": self.a_p.unit},
                "a_prime": rational_str(self.a_prime), "D": self.D, "N": self.N}


def build_C_ap(inst: FamilyInstance, lams: LambdaSeries = None) -> SeriesMatrix2:
    lams = lams or inst.lambdas()
    one = lams.one()
    if inst.a_p.is_zero:
        c11 = lams.zero()
    else:
        ratio = lams.lam_minus * invert_unit(lams.lam_pp)
        c11 = (ratio ** inst.h) * inst.a_p
    return SeriesMatrix2(c11, -one, lams.E ** inst.h, lams.zero())


def family_params(inst: FamilyInstance) -> DescentParams:
    """``(a, b) = (0, h)``, ``b' = h - a'``, scalars ``(-1, 1)``."""
    if not inst.gamma > 0:
        raise ParameterViolation("p * v_p(a_p) must exceed a'")
    return DescentParams.make(inst.p, 0, inst.h, inst.a_prime, inst.gamma, -1, 1)


def p0_truncation_threshold(inst: FamilyInstance):
    """Lower bound for ``v_R(P - T<=N(c11))``."""
    return inst.p * inst.v_ap + inst.gamma


@dataclass(frozen=True)
class Check:
    passed: bool
    certified_vR: object = None
    detail: str = ""

    def to_dict(self):
        out = {"pass": bool(self.passed), "certified_vR": _json_num(self.certified_vR)}
        if self.detail:
            out["detail"] = self.detail
        return out


def _json_num(x):
    if x is None or isinstance(x, bool):
        return x
    return rational_str(x)


@dataclass
class DescentReport:
    instance: FamilyInstance
    params: DescentParams
    result: DescentResult
    P: DiscSeries
    checks: dict = field(default_factory=dict)
    modp: "ResidueMatrix | None" = None
    kind: str = "descend"

    @property
    def trace(self):
        return self.result.trace

    @property
    def rounds(self):
        return len(self.result.trace.rounds)

    @property
    def conjugator_offset_vR(self):
        A = self.result.A_total
        return mat_vR(A - SeriesMatrix2.identity(A.c11))

    @property
    def P_coeffs(self):
        return [self.P.coeff(i) for i in range(self.params.N + 1)]

    @property
    def ok(self):
        return all(c.passed for c in self.checks.values())

    def failures(self):
        return [k for k, c in self.checks.items() if not c.passed]

    def require(self):
        bad = self.failures()
        if bad:
            raise CheckFailure(bad[0], self.checks[bad[0]].detail)
        return self

    def to_json(self):
        P = []
        for i, c in enumerate(self.P_coeffs):
            P.append({"degree": i, "valuation": None if c.is_zero else c.valuation,
                      "unit": c.unit, "prec": rational_str(c.abs_prec)})
        out = {
            "instance": self.instance.to_dict(),
            "command": self.kind,
            "P": P,
            "checks": {k: c.to_dict() for k, c in self.checks.items()},
            "rounds": self.rounds,
            "stop_floor": rational_str(self.result.stop_floor),
            "conjugator_offset_vR": rational_str(self.conjugator_offset_vR),
            "trace": self.trace.to_json(),
        }
        if self.modp is not None:
            out["modp_matrix"] = self.modp.to_json()
        return out


def _certified(f: DiscSeries):
    return f.valuation()


def _residual_check(f: DiscSeries, floor) -> Check:
    v = _certified(f)
    return Check(v >= floor, v)


def _make_checks(inst, params, lams, C_in, result) -> dict:
    floor = result.stop_floor
    Cf = result.C_final
    P = Cf.c11
    checks = {}
    const = truncate_le(P, 0) - P.like([inst.a_p])
    checks["P_at_0_equals_ap"] = _residual_check(const, floor)
    checks["degree_P_le_N"] = Check(P.poly_degree() <= params.N, P.poly_degree())
    checks["entry_12_is_minus_one"] = _residual_check(Cf.c12 + 1, floor)
    checks["entry_22_is_zero"] = _residual_check(Cf.c22, floor)
    checks["f_equals_Eh_residual"] = _residual_check(Cf.c21 - lams.E ** inst.h, floor)
    bound = p0_truncation_threshold(inst)
    v = _certified(P - truncate_le(C_in.c11, params.N))
    checks["P0_truncation_bound"] = Check(v >= bound, v, f"threshold {rational_str(bound)}")
    res = monodromy_residual(C_in, monodromy_B_from(lams, inst.h), lams)
    checks["monodromy_residual_input"] = Check(res.holds, res.stored,
                                               f"floor {rational_str(res.floor)}")
    orc = oracle_check(result)
    checks["oracle_equivalence"] = Check(orc.holds, orc.stored)
    fiber = all(a.to_fraction() == b.to_fraction() and a.abs_prec == b.abs_prec
                for a, b in zip(_flat(Cf.at_zero()), _flat(C_in.at_zero())))
    checks["fiber_at_zero_preserved"] = Check(fiber)
    g = params.gain
    diag_bound = result.initial.eps_C + params.a_prime + g
    T_in, _ = shape_split(C_in, params)
    d = min(_certified(Cf.c11 - T_in.c11), _certified(Cf.c22 - T_in.c22))
    checks["diagonal_shift_bound"] = Check(d >= min(diag_bound, floor), d,
                                           f"threshold {rational_str(diag_bound)}")
    return checks


def _flat(rows):
    return [x for row in rows for x in row]


def max_degree_ceiling(D: int) -> int:
    env = os.environ.get(MAX_DEGREE_ENV)
    return int(env) if env else 4 * D


def required_floor(inst: FamilyInstance):
    """Smallest stop floor at which the reported P says something: the
    truncation threshold plus one p-adic digit."""
    if inst.a_p.is_zero:
        return -INF
    return p0_truncation_threshold(inst) + inst.m


def _descend_once(inst, params, C_in):
    need = required_floor(inst)
    if default_stop_floor(C_in, params) < need:
        raise PrecisionExhausted(f"working floor is below the required {rational_str(need)}")
    result = descend(C_in, params)
    if result.stop_floor < need:
        raise PrecisionExhausted(f"stop floor {rational_str(result.stop_floor)} fell below "
                                 f"the required {rational_str(need)}")
    return result


def _descend_with_retry(inst: FamilyInstance, params_for):
    """Descend, doubling the working degree on precision failure."""
    ceiling = max_degree_ceiling(inst.D)
    while True:
        lams = inst.lambdas()
        C_in = build_C_ap(inst, lams)
        params = params_for(inst)
        try:
            return inst, params, lams, C_in, _descend_once(inst, params, C_in)
        except PrecisionExhausted:
            if 2 * inst.D > ceiling:
                raise
            D = 2 * inst.D
            inst = replace(inst, D=D, N=max(inst.N, default_digits(inst.p, D, inst.m)))


def run_family_descent(inst: FamilyInstance, strict: bool = True) -> DescentReport:
    """Descend ``C_ap`` to ``(P, -1; E^h, 0)`` and verify the output contract."""
    inst, params, lams, C_in, result = _descend_with_retry(inst, family_params)
    report = DescentReport(inst, params, result, result.C_final.c11)
    report.checks = _make_checks(inst, params, lams, C_in, result)
    return report.require() if strict else report


def integrality_check(P, d: int) -> bool:
    """True iff every coefficient of degree <= d has certified ``v_p >= 1``."""
    coeffs = [P.coeff(i) for i in range(d + 1)] if isinstance(P, DiscSeries) else list(P)
    if isinstance(P, DiscSeries) and P.poly_degree() > d:
        raise ValueError(f"polynomial has degree {P.poly_degree()} > {d}")
    for c in coeffs:
        if c.is_zero:
            if c.abs_prec < 1:
                raise IndeterminateAtPrecision("coefficient known to fewer than one digit")
        elif c.valuation < 1:
            return False
    return True


def integral_preconditions(p, h, a_p) -> list:
    v = INF if a_p.is_zero else a_p.valuation
    failures = []
    if not v > h // p:
        failures.append(f"v_p(a_p) = {v} is not > floor(h/p) = {h // p}")
    if h < 2 * p:
        failures.append(f"h = {h} is below 2p = {2 * p}")
    return failures


def integral_a_prime(p, h) -> Fraction:
    return Fraction(h, 2) - Fraction(p - 1, 2)


def integral_descent(inst: FamilyInstance, strict: bool = True) -> DescentReport:
    """Descent to ``pZ_p[u]``; needs ``v_p(a_p) > floor(h/p)`` and ``h >= 2p``."""
    failures = integral_preconditions(inst.p, inst.h, inst.a_p)
    if failures:
        raise PreconditionViolation(failures)
    inst = replace(inst, a_prime=integral_a_prime(inst.p, inst.h))
    report = run_family_descent(inst, strict=False)
    report.kind = "integral-descend"
    inst, P, h, p = report.instance, report.P, inst.h, inst.p
    report.checks["degree_P_le_h"] = Check(P.poly_degree() <= h, P.poly_degree())
    try:
        integral = integrality_check(P, max(h, P.poly_degree()))
        report.checks["integrality"] = Check(integral, min(c._vbound() for c in report.P_coeffs))
    except IndeterminateAtPrecision as exc:
        report.checks["integrality"] = Check(False, None, str(exc))
    margin = p * inst.v_ap - inst.a_prime
    report.checks["integral_margin"] = Check(margin > p, margin, "p*v_p(a_p) - a' > p")
    C_in = report.result.C_input
    v = _certified(P - truncate_le(C_in.c11, h))
    bound = p * inst.v_ap + p - 1
    report.checks["integral_truncation_bound"] = Check(v >= bound and bound > h, v,
                                                       f"threshold {rational_str(bound)}")
    try:
        report.modp = reduce_mod_p(report.result.C_final)
        match = report.modp == standard_modp(p, h)
        report.checks["modp_matrix_matches"] = Check(match, None, report.modp.text())
    except (NotIntegral, PrecisionExhausted) as exc:
        report.checks["modp_matrix_matches"] = Check(False, None, str(exc))
    return report.require() if strict else report


# -- reduction mod p ------------------------------------------------------------

def _poly_text(coeffs, var="u"):
    terms = []
    for i, c in enumerate(coeffs):
        if c:
            mono = "" if i == 0 else (var if i == 1 else f"{var}^{i}")
            if not mono:
                terms.append(str(c))
            elif c == 1:
                terms.append(mono)
            elif c == -1:
                terms.append(f"-{mono}")
            else:
                terms.append(f"{c}*{mono}")
    return " + ".join(terms).replace("+ -", "- ") if terms else "0"


@dataclass(frozen=True)
class ResidueMatrix:
    """2x2 matrix over F_p[u]; coefficients are balanced residues."""

    p: int
    entries: tuple

    def text(self):
        e = [_poly_text(c) for c in self.entries]
        return f"({e[0]}, {e[1]}; {e[2]}, {e[3]})"

    def to_json(self):
        return [[list(self.entries[0]), list(self.entries[1])],
                [list(self.entries[2]), list(self.entries[3])]]

    def __str__(self):
        return self.text()


def _balanced(r, p):
    r %= p
    return r - p if r > p // 2 and p > 2 else r


def _reduce_series(f: DiscSeries):
    p = f.p
    out = []
    for i in range(f.poly_degree() + 1):
        c = f.coeff(i)
        if not c.is_zero and c.valuation < 0:
            raise NotIntegral(f"coefficient of u^{i} has valuation {c.valuation}")
        out.append(c.residue())
    coeffs = [_balanced(c, p) for c in out]
    while coeffs and not coeffs[-1]:
        coeffs.pop()
    return tuple(coeffs)


def reduce_mod_p(C: SeriesMatrix2) -> ResidueMatrix:
    return ResidueMatrix(C.p, tuple(_reduce_series(f) for f in C.entries()))


def standard_modp(p: int, h: int) -> ResidueMatrix:
    """``(0, -1; u^h, 0)`` over F_p."""
    return ResidueMatrix(p, ((), (_balanced(-1, p),), (0,) * h + (1,), ()))


__all__ = [
    "FamilyInstance", "DescentReport", "Check", "ResidueMatrix", "build_C_ap",
    "family_params", "run_family_descent", "integral_descent", "integrality_check",
    "reduce_mod_p", "standard_modp", "p0_truncation_threshold", "default_degree",
    "default_digits", "integral_preconditions", "integral_a_prime",
]
