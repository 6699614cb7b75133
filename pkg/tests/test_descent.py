import json
from fractions import Fraction

import pytest

from kisin_descent.descent import (DescentParams, StopFloor, allowed_op, default_stop_floor,
                                   descend, descent_round, error_profile, is_allowable,
                                   oracle_check, shape_split, stop_margin, truncation_degree)
from kisin_descent.errors import InsufficientDegree, ParameterViolation
from kisin_descent.family import FamilyInstance, build_C_ap, family_params
from kisin_descent.matrix import SeriesMatrix2, det, mat_vR
from kisin_descent.scalar import INF


@pytest.fixture(scope="module")
def setup():
    inst = FamilyInstance.make(3, 7, 27, a_prime=Fraction(5, 2))
    lams = inst.lambdas()
    return inst, lams, build_C_ap(inst, lams), family_params(inst)


def test_truncation_degree():
    assert truncation_degree(3, 7, Fraction(5, 2), Fraction(9, 2)) == 7
    assert truncation_degree(3, 7, Fraction(7, 2), Fraction(7, 2)) == 7
    assert truncation_degree(3, 7, Fraction(1, 2), Fraction(13, 2)) == 9
    assert truncation_degree(5, 11, Fraction(3, 2), Fraction(19, 2)) == 12


def test_params(setup):
    _, _, _, params = setup
    assert (params.a, params.b, params.N) == (0, 7, 7)
    assert params.b_prime == Fraction(9, 2) and params.gamma == 2 and params.gain == 2


@pytest.mark.parametrize("kw", [
    dict(a=-1, b=7, a_prime=1, gamma=1),
    dict(a=0, b=7, a_prime=5, gamma=1),  # b' < a'
    dict(a=0, b=7, a_prime=1, gamma=0),
])
def test_params_rejected(kw):
    with pytest.raises(ParameterViolation):
        DescentParams.make(3, **kw)


def test_params_rejects_wrong_N():
    good = DescentParams.make(3, 0, 7, 1, 1)
    with pytest.raises(ParameterViolation):
        DescentParams(3, 0, 7, good.a_prime, good.b_prime, good.N + 1, good.gamma,
                      good.c_a, good.c_b)


def test_shape_split_of_C0(setup):
    inst, lams, _, params = setup
    C0 = SeriesMatrix2(lams.zero(), -lams.one(), lams.E ** 7, lams.zero())
    T, E = shape_split(C0, params)
    assert T == C0
    assert all(e.is_zero for e in E.entries())
    assert error_profile(C0, params).eps_C == INF


def test_error_entry_11_starts_at_u9(setup):
    _, _, C, params = setup
    _, E = shape_split(C, params)
    fr = E.c11.fractions()
    assert all(q == 0 for q in fr[:9]) and fr[9] != 0


def test_initial_error(setup):
    inst, _, C, params = setup
    prof = error_profile(C, params)
    assert prof.eps_C >= 3 * 3 - Fraction(5, 2)
    assert prof.eps_C >= params.gamma


def test_insufficient_degree(setup):
    inst, _, _, _ = setup
    small = FamilyInstance.make(3, 7, 27, a_prime=Fraction(1, 2), D=8, N=10)
    C = build_C_ap(small)
    with pytest.raises(InsufficientDegree):
        shape_split(C, family_params(small))


def test_allowability(setup):
    inst, lams, C, params = setup
    assert is_allowable(C, params).gamma >= min(3 * 3 - Fraction(5, 2), 2)
    std = SeriesMatrix2(lams.zero(), -lams.one(), lams.u ** 7, lams.zero())
    assert is_allowable(std, params).gamma == INF
    C0 = SeriesMatrix2(lams.zero(), -lams.one(), lams.E ** 7, lams.zero())
    assert is_allowable(C0, params).gamma == 2  # v_R(u^h - E^h) = h + p - 1
    bad = C0.replace((1, 1), lams.one())
    allow = is_allowable(bad, params)
    assert not allow and allow.offending == (1, 1)


def test_allowed_op_on_exact_shape(setup):
    _, lams, _, params = setup
    C0 = SeriesMatrix2(lams.zero(), -lams.one(), lams.E ** 7, lams.zero())
    for ij in ((1, 1), (1, 2), (2, 1), (2, 2)):
        A, C2 = allowed_op(C0, params, ij)
        assert A == SeriesMatrix2.identity(lams.E) and C2 == C0


def test_single_operation_gain(setup):
    _, _, C, params = setup
    before = error_profile(C, params)
    for ij in ((1, 1), (1, 2), (2, 1), (2, 2)):
        if before[ij] == INF:
            continue
        A, C2 = allowed_op(C, params, ij)
        after = error_profile(C2, params)
        assert after[ij] >= before[ij] + params.gamma
        assert after.eps_C >= before.eps_C
        if ij == (1, 1):
            assert after[(2, 2)] >= min(before[(2, 2)], before[(1, 1)])
        assert C2.at_zero() == C.at_zero()


def test_rounds_preserve_allowability_and_fiber(setup):
    _, _, C, params = setup
    stop = StopFloor(default_stop_floor(C, params), stop_margin(C, params))
    cur = C
    for k in range(4):
        start = error_profile(cur, params, stop.value)
        A, nxt, rec = descent_round(cur, params, stop, k + 1)
        assert rec.after.eps_C >= start.eps_C + params.gain
        assert is_allowable(nxt, params).gamma >= params.gamma
        assert nxt.at_zero() == C.at_zero()
        cur = nxt


def test_descend_trivial_fiber(setup):
    _, lams, _, params = setup
    C0 = SeriesMatrix2(lams.zero(), -lams.one(), lams.E ** 7, lams.zero())
    A, C_final, trace = descend(C0, params)
    assert A == SeriesMatrix2.identity(lams.E) and C_final == C0 and trace.rounds == []


def test_descend_rejects_non_allowable(setup):
    _, lams, _, params = setup
    bad = SeriesMatrix2(lams.one(), -lams.one(), lams.E ** 7, lams.zero())
    with pytest.raises(ParameterViolation):
        descend(bad, params)


def test_descend_full(setup):
    inst, lams, C, params = setup
    result = descend(C, params)
    A, C_final, trace = result
    assert oracle_check(result).holds
    eps0 = result.initial.eps_C
    shift = abs(params.b_prime - params.a)
    assert eps0 >= shift
    assert mat_vR(A - SeriesMatrix2.identity(lams.E)) >= eps0 - shift
    d = det(C_final) - det(C)
    assert d.valuation() >= result.stop_floor
    assert C_final.at_zero() == C.at_zero()
    text = json.dumps(trace.to_json(), sort_keys=True)
    again = json.dumps(descend(C, params).trace.to_json(), sort_keys=True)
    assert text == again
