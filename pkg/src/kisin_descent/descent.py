"""Twisted-conjugation descent of a 2x2 Frobenius matrix to polynomial shape.

The target shape is ``T(C) = (T<=N c11, T<=a c12; T<=b c21, T<=a c22)``.
Each allowed operation conjugates away one entry of ``E(C) = C - T(C)`` and
a round applies them in a fixed schedule so that the error

    eps_C = min(v(e11) - a', v(e12) - a, v(e21) - b, v(e22) - b')

grows by at least ``min(gamma, p-1)``.  At capped precision the loop stops
once every error entry is certified to lie in ``H_stop_floor``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import (InsufficientDegree, NonTermination, NoProgress, ParameterViolation)
from .matrix import SeriesMatrix2, mat_mul, mat_vR, twisted_conjugate
from .scalar import INF, PadicScalar
from .series import DiscSeries, divide_by_u, rational_str, truncate_gt, truncate_le

# fixed tie-break order for reproducible traces
TIE_ORDER = ((1, 2), (2, 1), (1, 1), (2, 2))
TIE_ORDER_CANON = ((1, 1), (1, 2), (2, 1), (2, 2))


def truncation_degree(p, b, a_prime, b_prime) -> int:
    """Degree cap for the (1,1) entry of the target shape."""
    if b_prime == a_prime:
        return b
    return b + math.ceil(Fraction(b_prime - a_prime) / (p - 1)) - 1


@dataclass(frozen=True)
class DescentParams:
    p: int
    a: int
    b: int
    a_prime: Fraction
    b_prime: Fraction
    N: int
    gamma: Fraction
    c_a: PadicScalar
    c_b: PadicScalar

    def __post_init__(self):
        if self.a < 0 or self.b < 0:
            raise ParameterViolation("a and b must be nonnegative")
        if self.a + self.b != self.a_prime + self.b_prime:
            raise ParameterViolation("a + b must equal a' + b'")
        if self.b_prime < self.a_prime:
            raise ParameterViolation("b' must be at least a'")
        if not self.gamma > 0:
            raise ParameterViolation("gamma must be positive")
        if self.N != truncation_degree(self.p, self.b, self.a_prime, self.b_prime):
            raise ParameterViolation("N does not match b + ceil((b'-a')/(p-1)) - 1")
        for c in (self.c_a, self.c_b):
            if c.is_zero or c.valuation != 0:
                raise ParameterViolation("c_a and c_b must be units")

    @classmethod
    def make(cls, p, a, b, a_prime, gamma, c_a=-1, c_b=1):
        a_prime = Fraction(a_prime)
        b_prime = a + b - a_prime
        wrap = lambda c: c if isinstance(c, PadicScalar) else PadicScalar.make(p, c)
        return cls(p, a, b, a_prime, b_prime, truncation_degree(p, b, a_prime, b_prime),
                   Fraction(gamma), wrap(c_a), wrap(c_b))

    @property
    def gain(self):
        """Guaranteed per-round increase of the error."""
        return min(self.gamma, self.p - 1)

    def shifts(self):
        return {(1, 1): self.a_prime, (1, 2): self.a, (2, 1): self.b, (2, 2): self.b_prime}

    def degrees(self):
        return {(1, 1): self.N, (1, 2): self.a, (2, 1): self.b, (2, 2): self.a}


@dataclass(frozen=True)
class ErrorProfile:
    eps_11: object
    eps_12: object
    eps_21: object
    eps_22: object

    @property
    def eps_C(self):
        return min(self.eps_11, self.eps_12, self.eps_21, self.eps_22)

    def __getitem__(self, ij):
        return {(1, 1): self.eps_11, (1, 2): self.eps_12,
                (2, 1): self.eps_21, (2, 2): self.eps_22}[ij]

    def to_dict(self):
        return {"eps_11": rational_str(self.eps_11), "eps_12": rational_str(self.eps_12),
                "eps_21": rational_str(self.eps_21), "eps_22": rational_str(self.eps_22),
                "eps_C": rational_str(self.eps_C)}


@dataclass(frozen=True)
class OpRecord:
    label: str
    before: ErrorProfile
    after: ErrorProfile
    conjugator_vR: object

    def to_dict(self):
        return {"op": self.label, "before": self.before.to_dict(),
                "after": self.after.to_dict(),
                "conjugator_offset_vR": rational_str(self.conjugator_vR)}


@dataclass(frozen=True)
class RoundRecord:
    index: int
    ops: tuple
    before: ErrorProfile
    after: ErrorProfile
    conjugator_vR: object

    def to_dict(self):
        return {"round": self.index, "before": self.before.to_dict(),
                "after": self.after.to_dict(),
                "conjugator_offset_vR": rational_str(self.conjugator_vR),
                "ops": [o.to_dict() for o in self.ops]}


@dataclass
class DescentTrace:
    rounds: list = field(default_factory=list)
    terminal_floor: object = INF

    def to_json(self):
        return [r.to_dict() for r in self.rounds]


@dataclass(frozen=True)
class Allowability:
    gamma: object
    margins: dict
    offending: tuple | None

    @property
    def ok(self):
        return self.gamma > 0

    def __bool__(self):
        return self.ok


def _check_degree(C: SeriesMatrix2, params: DescentParams):
    need = max(params.N, params.a, params.b)
    if C.degree < need:
        raise InsufficientDegree(f"working degree {C.degree} is below N = {need}")


def shape_split(C: SeriesMatrix2, params: DescentParams):
    """Return ``(T(C), E(C))``."""
    _check_degree(C, params)
    deg = params.degrees()
    T = SeriesMatrix2(*(truncate_le(C[ij], deg[ij]) for ij in TIE_ORDER_CANON))
    E = SeriesMatrix2(*(truncate_gt(C[ij], deg[ij]) for ij in TIE_ORDER_CANON))
    return T, E


def error_profile(C: SeriesMatrix2, params: DescentParams, stop_floor=INF) -> ErrorProfile:
    """Certified errors; entries already in ``H_stop_floor`` count as +inf."""
    _, E = shape_split(C, params)
    return _profile(E, params, stop_floor)


def _profile(E, params, stop_floor):
    sh = params.shifts()
    vals = []
    for ij in TIE_ORDER_CANON:
        v = E[ij].valuation()
        vals.append(INF if v >= stop_floor else v - sh[ij])
    return ErrorProfile(*vals)


def is_allowable(C: SeriesMatrix2, params: DescentParams) -> Allowability:
    """Largest gamma certified by ``C - (0 c_a u^a; c_b u^b 0)``."""
    ref = C.c11
    shape = SeriesMatrix2(ref.like([]), DiscSeries.monomial(ref.p, params.a, params.c_a.to_fraction(),
                                                            m=ref.m, degree=ref.degree),
                          DiscSeries.monomial(ref.p, params.b, params.c_b.to_fraction(),
                                              m=ref.m, degree=ref.degree), ref.like([]))
    diff = C - shape
    sh = params.shifts()
    margins = {ij: diff[ij].valuation() - sh[ij] for ij in TIE_ORDER_CANON}
    worst = min(TIE_ORDER_CANON, key=lambda ij: margins[ij])
    gamma = margins[worst]
    return Allowability(gamma, margins, None if gamma > 0 else worst)


def _conjugator(E: SeriesMatrix2, params: DescentParams, ij):
    ref = E.c11
    one, zero = ref.like([1]), ref.like([])
    ca_inv, cb_inv = params.c_a.inverse(), params.c_b.inverse()
    if ij == (1, 1):
        x = -divide_by_u(E.c11, params.b) * cb_inv
        return SeriesMatrix2(one, x, zero, one)
    if ij == (1, 2):
        return SeriesMatrix2(one - divide_by_u(E.c12, params.a) * ca_inv, zero, zero, one)
    if ij == (2, 1):
        return SeriesMatrix2(one, zero, zero, one - divide_by_u(E.c21, params.b) * cb_inv)
    if ij == (2, 2):
        x = -divide_by_u(E.c22, params.a) * ca_inv
        return SeriesMatrix2(one, zero, x, one)
    raise ValueError(f"no allowed operation for entry {ij}")


def _offset_vR(A: SeriesMatrix2):
    I = SeriesMatrix2.identity(A.c11)
    return mat_vR(A - I)


def allowed_op(C: SeriesMatrix2, params: DescentParams, ij):
    """Conjugate away entry ``ij`` of ``E(C)``; returns ``(A, A *_phi C)``."""
    _, E = shape_split(C, params)
    A = _conjugator(E, params, ij)
    return A, twisted_conjugate(A, C)


def _label(ij):
    return f"alpha_{ij[0]}{ij[1]}"


@dataclass
class StopFloor:
    """Certified v_R target for the error entries.

    With ``margin`` set the target follows the working precision down: after
    every operation it becomes ``min(value, vfloor(C) - margin)``.  It never
    rises, so an entry once certified stays certified.
    """

    value: object
    margin: object = None

    def update(self, C: SeriesMatrix2):
        if self.margin is not None:
            self.value = min(self.value, C.vfloor - self.margin)


def descent_round(C: SeriesMatrix2, params: DescentParams, stop_floor=INF, index=0):
    """One round: off-diagonal operations, then (1,1), then (2,2).

    ``stop_floor`` is a number or a :class:`StopFloor`; entries certified in
    ``H_stop_floor`` are treated as already eliminated.  Returns
    ``(A_round, C', RoundRecord)``.
    """
    stop = stop_floor if isinstance(stop_floor, StopFloor) else StopFloor(stop_floor)
    g = params.gain
    start = error_profile(C, params, stop.value)
    target = start.eps_C + g
    ops = []
    state = {"C": C, "A": SeriesMatrix2.identity(C.c11)}

    def profile():
        return error_profile(state["C"], params, stop.value)

    def apply(ij):
        before = profile()
        if before[ij] == INF:
            return
        A, C2 = allowed_op(state["C"], params, ij)
        stop.update(C2)
        before = profile()
        after = error_profile(C2, params, stop.value)
        if after[ij] < before[ij] + params.gamma:
            e = shape_split(C2, params)[1][ij]
            raise NoProgress(f"{_label(ij)} gained {after[ij] - before[ij]} < gamma at "
                             f"certified precision (stored v_R {e.stored_valuation()}, "
                             f"floor {e.vfloor}, stop {stop.value})")
        if after.eps_C < before.eps_C:
            raise NoProgress(f"{_label(ij)} decreased the error at certified precision")
        ops.append(OpRecord(_label(ij), before, after, _offset_vR(A)))
        state["C"], state["A"] = C2, mat_mul(A, state["A"])

    # each off-diagonal step gains at least gamma >= the round gain
    limit = 8
    prof = profile()
    while prof.eps_12 < target or prof.eps_21 < target:
        if len(ops) >= limit:
            raise NoProgress("off-diagonal phase did not reach its threshold")
        apply(min(((1, 2), (2, 1)), key=lambda k: (prof[k], TIE_ORDER.index(k))))
        prof = profile()
    apply((1, 1))
    apply((2, 2))
    prof = profile()
    if prof.eps_C < target:
        raise NoProgress(f"round gained {prof.eps_C - start.eps_C} < {g}")
    rec = RoundRecord(index, tuple(ops), start, prof, _offset_vR(state["A"]))
    return state["A"], state["C"], rec


def default_stop_floor(C: SeriesMatrix2, params: DescentParams):
    """Input floor minus one p-adic digit and the conjugator shift ``|b' - a|``.

    Conjugators divide by ``u^a`` or ``u^b`` and move error terms between
    entries with different shifts, so an unknown tail at the input floor can
    reappear up to ``|b' - a|`` lower in absolute v_R.
    """
    return C.vfloor - stop_margin(C, params)


def stop_margin(C: SeriesMatrix2, params: DescentParams):
    return C.m + abs(params.b_prime - params.a)


def max_rounds(start: ErrorProfile, params: DescentParams, stop_floor):
    if stop_floor == INF or start.eps_C == INF:
        return 0
    need = stop_floor - min(params.a, params.a_prime) - start.eps_C
    return max(math.ceil(need / params.gain), 0) + 1


@dataclass
class DescentResult:
    A_total: SeriesMatrix2
    C_final: SeriesMatrix2
    trace: DescentTrace
    C_input: SeriesMatrix2
    C_last: SeriesMatrix2
    stop_floor: object
    initial: ErrorProfile

    def __iter__(self):
        return iter((self.A_total, self.C_final, self.trace))


def descend(C: SeriesMatrix2, params: DescentParams, stop_floor=None) -> DescentResult:
    """Iterate rounds until ``E(C)`` is certified in ``H_stop_floor``; return ``T(C)``.

    Unpacks as ``(A_total, C_final, trace)``.
    """
    if stop_floor is None:
        stop = StopFloor(default_stop_floor(C, params), stop_margin(C, params))
    else:
        stop = StopFloor(stop_floor)
    allow = is_allowable(C, params)
    if allow.gamma < params.gamma:
        raise ParameterViolation(
            f"input is only {rational_str(allow.gamma)}-allowable, need "
            f"{rational_str(params.gamma)} (entry {allow.offending})")
    start = error_profile(C, params, stop.value)
    cap = max_rounds(start, params, stop.value)
    trace = DescentTrace()
    A_total = SeriesMatrix2.identity(C.c11)
    cur = C
    prof = start
    while prof.eps_C != INF:
        if len(trace.rounds) >= cap:
            raise NonTermination(f"exceeded {cap} rounds")
        A, cur, rec = descent_round(cur, params, stop, len(trace.rounds) + 1)
        A_total = mat_mul(A, A_total)
        trace.rounds.append(rec)
        prof = error_profile(cur, params, stop.value)
    trace.terminal_floor = stop.value
    T, _ = shape_split(cur, params)
    return DescentResult(A_total, T, trace, C, cur, stop.value, start)


@dataclass(frozen=True)
class OracleCheck:
    stored: object
    required: object

    @property
    def holds(self):
        return self.stored >= self.required


def oracle_check(result: DescentResult) -> OracleCheck:
    """Recompute ``A_total *_phi C_input`` from scratch and compare with ``C_final``."""
    again = twisted_conjugate(result.A_total, result.C_input)
    diff = again - result.C_final
    stored = min(min(f.stored_valuation(), f.vfloor) for f in diff.entries())
    return OracleCheck(stored, result.stop_floor)
