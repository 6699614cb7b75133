"""Acceptance suite: one recorded pass/fail line per criterion.

The lines are printed in the pytest terminal summary (see conftest.py).
Runtime limits are asserted with wall-clock timing.
"""

import functools
import math
import subprocess
import sys
import time
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from conftest import INSTANCES, family_report
from kisin_descent.descent import oracle_check
from kisin_descent.family import (FamilyInstance, build_C_ap, integral_descent, reduce_mod_p,
                                  standard_modp)
from kisin_descent.matrix import SeriesMatrix2, monodromy_B_from, monodromy_residual
from kisin_descent.series import (DiscSeries, HvCertificate, derivative, frobenius,
                                  lambda_factory, shift_up, vR)

RESULTS = {}


def criterion(number, title):
    """Record the outcome of an acceptance test under its number."""

    def wrap(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            # parametrized criteria pass only if every case passes
            try:
                fn(*args, **kwargs)
            except BaseException as exc:
                RESULTS[number] = (title, False, f"{type(exc).__name__}: {exc}".splitlines()[0])
                raise
            RESULTS.setdefault(number, (title, True, ""))
        return run

    return wrap


def holds(f):
    """Residual is certified zero at working precision."""
    return f.stored_valuation() >= f.vfloor


# -- 1 ---------------------------------------------------------------------------

LAMBDA_PRIMES = (2, 3, 5)


def lambda_valuations(p):
    lams = lambda_factory(p, 2 * p**3 + 1, 3 * p + 10)
    return {"lam_minus": vR(lams.lam_minus), "lam_pp": vR(lams.lam_pp),
            "one_minus_lam_pp": vR(1 - lams.lam_pp),
            "one_minus_phi_lam_pp": vR(1 - frobenius(lams.lam_pp))}


@pytest.mark.xfail(strict=True, reason="v_R(1 - phi(lambda_++)) is p^3 - p, not p^3 - p^2; "
                                       "see test_lambda_pp_frobenius_gap_is_p3_minus_p")
@criterion(1, "lambda valuation estimates for p in {2,3,5}")
def test_acceptance_01_lambda_estimates():
    start = time.perf_counter()
    got = {p: lambda_valuations(p) for p in LAMBDA_PRIMES}
    assert time.perf_counter() - start < 1
    for p in LAMBDA_PRIMES:
        assert got[p]["lam_minus"] == 0 and got[p]["lam_pp"] == 0
        assert got[p]["one_minus_lam_pp"] == p**2 - p
    bad = {p: got[p]["one_minus_phi_lam_pp"] for p in LAMBDA_PRIMES
           if got[p]["one_minus_phi_lam_pp"] != p**3 - p**2}
    assert not bad, (f"v_R(1 - phi(lambda_++)) = {bad}, expected p^3 - p^2 = "
                     f"{ {p: p**3 - p**2 for p in bad} }")


def test_lambda_pp_frobenius_gap_is_p3_minus_p():
    """The leading term of 1 - phi(lambda_++) is -u^(p^3)/p, so v_R = p^3 - p exactly."""
    for p in LAMBDA_PRIMES:
        v = lambda_valuations(p)["one_minus_phi_lam_pp"]
        assert v == p**3 - p
        assert v >= p**3 - p**2  # the stated value holds as a lower bound


# -- 2 ---------------------------------------------------------------------------

@criterion(2, "lambda product and derivative identities, p=3, D>=100, N>=20")
def test_acceptance_02_lambda_identities():
    start = time.perf_counter()
    p = 3
    lams = lambda_factory(p, 120, 25)
    E, lp, lm = lams.E, lams.lam_plus, lams.lam_minus
    residuals = {
        "lambda = lambda_+ lambda_-": lams.lam - lp * lm,
        "phi(lambda_+) = lambda_-": frobenius(lp) - lm,
        "E phi(lambda_-) = p lambda_+": E * frobenius(lm) - lp * p,
        "p u^(p-1) phi(lambda_+') = lambda_-'":
            shift_up(frobenius(derivative(lp)), p - 1) * p - derivative(lm),
    }
    assert time.perf_counter() - start < 1
    for name, r in residuals.items():
        assert holds(r), f"{name}: stored {r.stored_valuation()} < floor {r.vfloor}"
        assert r.vfloor > 60


# -- 3 ---------------------------------------------------------------------------

@criterion(3, "monodromy relation for C_0 and C_ap")
@pytest.mark.parametrize("p, h, ap", INSTANCES)
def test_acceptance_03_monodromy(p, h, ap):
    start = time.perf_counter()
    inst = FamilyInstance.make(p, h, ap)
    lams = inst.lambdas()
    B = monodromy_B_from(lams, h)
    C0 = SeriesMatrix2(lams.zero(), -lams.one(), lams.E ** h, lams.zero())
    for C in (C0, build_C_ap(inst, lams)):
        r = monodromy_residual(C, B, lams)
        assert r.holds, f"stored {r.stored} < floor {r.floor}"
    assert time.perf_counter() - start < 5


# -- 4 ---------------------------------------------------------------------------

@st.composite
def series_in_Hv(draw):
    """Random f with a known certificate f in H_v and u^j R."""
    p = draw(st.sampled_from([2, 3, 5]))
    m = draw(st.sampled_from([p, p + 1, 2]))
    D = draw(st.integers(4, 60))
    j = draw(st.integers(0, D))
    v = Fraction(draw(st.integers(-3 * m, 40)), draw(st.sampled_from([1, 2, 3])))
    coeffs = [0] * (D + 1)
    for i in range(j, D + 1):
        if draw(st.booleans()):
            lo = math.ceil(Fraction(v - i, m))  # smallest valuation allowed at degree i
            e = draw(st.integers(lo, lo + 3))
            c = draw(st.integers(1, 50)) * draw(st.sampled_from([1, -1]))
            coeffs[i] = Fraction(c) * Fraction(p) ** e
    certs = []
    if draw(st.booleans()):
        certs.append(HvCertificate(v + draw(st.integers(0, 5)), j + draw(st.integers(0, 5))))
    f = DiscSeries.from_coefficients(p, coeffs, m=m, degree=D, certs=certs)
    return p, v, j, f


FROBENIUS_VIOLATIONS = []


@criterion(4, "Frobenius growth over 1000 random series")
@settings(max_examples=1000, database=None)
@given(series_in_Hv())
def test_acceptance_04_frobenius_growth(case):
    p, v, j, f = case
    assert f.valuation() >= v and f.u_order() >= j
    g = frobenius(f)
    if not (g.valuation() >= j * (p - 1) + v and g.u_order() >= p * j):
        FROBENIUS_VIOLATIONS.append(case)
    assert not FROBENIUS_VIOLATIONS, FROBENIUS_VIOLATIONS[0]


# -- 5 ---------------------------------------------------------------------------

@criterion(5, "descent trace invariants")
@pytest.mark.parametrize("p, h, ap", INSTANCES)
def test_acceptance_05_trace(p, h, ap):
    rep = family_report(p, h, ap)
    gain = min(rep.instance.gamma, p - 1)
    rounds = rep.trace.rounds
    assert rounds
    for rnd in rounds:
        for op in rnd.ops:
            assert op.after.eps_C >= op.before.eps_C, f"round {rnd.index} {op.label}"
        assert rnd.after.eps_C >= rnd.before.eps_C + gain, f"round {rnd.index}"
    bound = (rep.result.stop_floor - rep.result.initial.eps_C) / gain + 1
    assert len(rounds) <= bound, f"{len(rounds)} rounds > {bound}"


# -- 6 ---------------------------------------------------------------------------

@criterion(6, "oracle equivalence of the accumulated conjugator")
@pytest.mark.parametrize("p, h, ap", INSTANCES)
def test_acceptance_06_oracle(p, h, ap):
    rep = family_report(p, h, ap)
    orc = oracle_check(rep.result)
    assert orc.holds, f"residual {orc.stored} < stop floor {orc.required}"


# -- 7 ---------------------------------------------------------------------------

@criterion(7, "output contract (P, -1; E^h, 0)")
@pytest.mark.parametrize("p, h, ap", INSTANCES)
def test_acceptance_07_contract(p, h, ap):
    rep = family_report(p, h, ap)
    inst, P = rep.instance, rep.P
    assert P.coeff(0).to_fraction() == ap and P.coeff(0).is_exact
    assert P.poly_degree() <= rep.params.N
    c21 = rep.result.C_final.c21 - inst.lambdas().E ** h
    assert c21.valuation() >= rep.result.stop_floor
    v = inst.a_p.valuation
    threshold = p * v + min(p * v - inst.a_prime, p - 1)
    check = rep.checks["P0_truncation_bound"]
    assert check.passed and check.certified_vR >= threshold
    assert check.detail == f"threshold {threshold}"


# -- 8 ---------------------------------------------------------------------------

@criterion(8, "integral instance p=3, h=7, a_p=27")
def test_acceptance_08_integral_instance():
    start = time.perf_counter()
    rep = integral_descent(FamilyInstance.make(3, 7, 27))
    assert time.perf_counter() - start < 10
    P = rep.P
    assert P.poly_degree() <= 7
    coeffs = [P.coeff(j) for j in range(8)]
    assert all(c.is_zero or c.valuation >= 1 for c in coeffs)
    expected = {0: 27, 3: 63, 6: 63}
    for j in range(8):
        digits = math.ceil(Fraction(11 - j, 3))
        diff = P.coeff_fraction(j) - expected.get(j, 0)
        assert diff.denominator % 3 and diff.numerator % 3**digits == 0, f"u^{j}"


# -- 9 ---------------------------------------------------------------------------

@criterion(9, "mod-p matrix is (0, -1; u^h, 0) for p=3, h in 7..10")
def test_acceptance_09_modp_constancy():
    start = time.perf_counter()
    p = 3
    for h in (7, 8, 9, 10):
        s = h // p + 1
        seen = set()
        for ap in (p**s, p**(s + 1), 2 * p**s):
            rep = integral_descent(FamilyInstance.make(p, h, ap))
            assert reduce_mod_p(rep.result.C_final) == standard_modp(p, h), (h, ap)
            seen.add(rep.modp)
        assert len(seen) == 1
    assert time.perf_counter() - start < 60


# -- 10 --------------------------------------------------------------------------

@criterion(10, "trivial fiber a_p = 0")
@pytest.mark.parametrize("p, h", [(2, 5), (3, 7), (3, 10), (5, 11), (7, 3)])
def test_acceptance_10_zero_ap(p, h):
    rep = family_report(p, h, 0)
    assert rep.rounds == 0
    assert rep.result.A_total == SeriesMatrix2.identity(rep.P)
    assert rep.P.is_zero


# -- 11 --------------------------------------------------------------------------

@criterion(11, "integral-descend rejects the hypothesis boundary")
@pytest.mark.parametrize("h, ap", [(7, "9"), (5, "p^3")])
def test_acceptance_11_boundary(h, ap):
    proc = subprocess.run([sys.executable, "-m", "kisin_descent", "integral-descend",
                           "--p", "3", "--h", str(h), "--ap", ap],
                          capture_output=True, text=True)
    assert proc.returncode == 2, proc.stderr
    assert "precondition" in proc.stderr
