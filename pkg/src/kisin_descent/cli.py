"""Command-line front end: parse an instance, run a pipeline, print a report.

Exit codes: 0 when every check passes, 2 on a precondition or usage error,
3 when the working precision runs out, 4 when a check fails.
"""

from __future__ import annotations

import argparse
import json
import random
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction

from .errors import (CheckFailure, KisinError, NonTermination, NotIntegral, ParameterViolation,
                     PrecisionExhausted, PreconditionViolation)
from .family import (Check, FamilyInstance, build_C_ap, integral_descent, reduce_mod_p,
                     run_family_descent, standard_modp)
from .matrix import SeriesMatrix2, change_of_basis_B, monodromy_B_from, monodromy_residual, \
    twisted_conjugate
from .scalar import INF, PadicScalar, format_scalar, is_prime, split_int
from .series import lambda_factory, pretty, rational_str

EXIT_OK, EXIT_PRECONDITION, EXIT_PRECISION, EXIT_CHECK = 0, 2, 3, 4

COMMANDS = ("descend", "integral-descend", "verify-monodromy", "reduce-mod-p", "lambda", "sweep")


@dataclass
class JobSpec:
    command: str
    p: int
    h: int | None = None
    ap: PadicScalar | None = None
    a_prime: Fraction | None = None
    D: int | None = None
    N: int | None = None
    output: str = "text"
    seed: int = 0
    h_range: tuple = ()
    s_range: tuple = ()
    unit: int = 1
    jobs: int = 1
    extra: dict = field(default_factory=dict)

    def instance(self, **over) -> FamilyInstance:
        kw = dict(a_prime=self.a_prime, D=self.D, N=self.N)
        kw.update(over)
        return FamilyInstance.make(self.p, self.h, self.ap, **kw)


class UsageError(Exception):
    pass


# -- parsing ---------------------------------------------------------------

_AP_RE = re.compile(r"^(?:(?P<c1>-?\d+)\*)?(?P<base>p|\d+)\^(?P<s>-?\d+)(?:\*(?P<c2>-?\d+))?$")


def parse_ap(text: str, p: int) -> PadicScalar:
    """``"0"``, ``"p^s"``, ``"p^s*c"``, ``"c*p^s"`` or a plain integer."""
    t = text.replace(" ", "")
    if re.fullmatch(r"-?\d+", t):
        n = int(t)
        if n == 0:
            return PadicScalar.zero(p)
        v, c = split_int(n, p)
    else:
        mt = _AP_RE.match(t)
        if not mt or (mt.group("c1") and mt.group("c2")):
            raise UsageError(f"--ap: cannot parse {text!r}; expected p^s*c")
        if mt.group("base") != "p" and int(mt.group("base")) != p:
            raise UsageError(f"--ap: base {mt.group('base')} is not p = {p}")
        v = int(mt.group("s"))
        c = int(mt.group("c1") or mt.group("c2") or 1)
        if c % p == 0:
            raise UsageError(f"--ap: c = {c} is divisible by p")
    if v <= 0:
        raise UsageError(f"--ap: v_p(a_p) = {v} must be positive")
    return PadicScalar(p, v, c, INF)


def parse_rational(text: str, flag: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"{flag}: cannot parse rational {text!r}") from None


def parse_range(text: str, flag: str) -> tuple:
    """``"7:10"`` (inclusive) or a comma list ``"7,9"``."""
    try:
        if ":" in text:
            lo, hi = (int(x) for x in text.split(":"))
            return tuple(range(lo, hi + 1))
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise UsageError(f"{flag}: cannot parse range {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kisin-descent",
                                 description="Descent of the family C_ap and its checks.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--p", type=int, required=True, help="the prime")
    g = ap.add_mutually_exclusive_group()
    g.add_argument("--h", type=int, help="h = k - 1")
    g.add_argument("--k", type=int, help="weight k; h = k - 1")
    ap.add_argument("--ap", help='a_p as "p^s*c" (s >= 1, c prime to p) or "0"')
    ap.add_argument("--a-prime", help='rational "n/d"; default h/2')
    ap.add_argument("--deg", type=int, help="working u-degree D")
    ap.add_argument("--prec", type=int, help="coefficient precision N in p-adic digits")
    ap.add_argument("--format", choices=("text", "json"), default="text")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--h-range", help="sweep: h values, e.g. 7:10")
    ap.add_argument("--s-range", help="sweep: v_p(a_p) values, e.g. 3:4")
    ap.add_argument("--unit", type=int, default=1, help="sweep: unit part c of a_p")
    ap.add_argument("--mode", choices=("descend", "integral-descend"),
                    default="integral-descend", help="sweep: pipeline per instance")
    ap.add_argument("--jobs", type=int, default=1, help="sweep: worker processes")
    return ap


def parse_args(argv) -> JobSpec:
    ns = build_parser().parse_args(argv)
    p = ns.p
    if not is_prime(p):
        raise UsageError(f"--p: {p} is not prime")
    job = JobSpec(ns.command, p, output=ns.format, seed=ns.seed, D=ns.deg, N=ns.prec,
                  unit=ns.unit, jobs=ns.jobs, extra={"mode": ns.mode})
    if ns.deg is not None and ns.deg < 1:
        raise UsageError("--deg must be positive")
    if ns.prec is not None and ns.prec < 1:
        raise UsageError("--prec must be positive")
    if ns.command == "lambda":
        if ns.deg is None:
            raise UsageError("--deg is required for lambda")
        return job
    h = ns.h if ns.h is not None else (ns.k - 1 if ns.k is not None else None)
    if ns.command == "sweep":
        if ns.h_range is None or ns.s_range is None:
            raise UsageError("sweep needs --h-range and --s-range")
        job.h_range = parse_range(ns.h_range, "--h-range")
        job.s_range = parse_range(ns.s_range, "--s-range")
        if any(s <= 0 for s in job.s_range):
            raise UsageError("--s-range: v_p(a_p) must be positive")
        if job.unit % p == 0:
            raise UsageError("--unit: c is divisible by p")
        return job
    if h is None:
        raise UsageError("--h or --k is required")
    if h < 1:
        raise UsageError("--h: must be positive")
    if ns.ap is None:
        raise UsageError("--ap is required")
    job.h = h
    job.ap = parse_ap(ns.ap, p)
    if ns.a_prime is not None:
        job.a_prime = parse_rational(ns.a_prime, "--a-prime")
    return job


# -- pipelines ---------------------------------------------------------------

@dataclass
class JobResult:
    code: int
    payload: dict
    text: str


def _ap_text(a):
    return "0" if a.is_zero else format_scalar(a)


def _instance_line(inst):
    return (f"instance: p={inst.p} h={inst.h} a_p={_ap_text(inst.a_p)} "
            f"a'={rational_str(inst.a_prime)} D={inst.D} N={inst.N}")


def _checks_text(checks):
    lines = []
    for name, c in checks.items():
        flag = "PASS" if c.passed else "FAIL"
        v = "" if c.certified_vR is None else f"  certified_vR={rational_str(c.certified_vR)}"
        d = f"  ({c.detail})" if c.detail else ""
        lines.append(f"  {flag} {name}{v}{d}")
    return lines


def report_text(report) -> str:
    lines = [_instance_line(report.instance), f"command: {report.kind}", "P:"]
    terms = [(i, c) for i, c in enumerate(report.P_coeffs) if not (c.is_zero and c.is_exact)]
    lines.extend(f"  u^{i}: {format_scalar(c)}" for i, c in terms)
    if not terms:
        lines.append("  0")
    lines.append(f"rounds: {report.rounds}  stop_floor: {rational_str(report.result.stop_floor)}"
                 f"  conjugator_offset_vR: {rational_str(report.conjugator_offset_vR)}")
    lines.append("checks:")
    lines.extend(_checks_text(report.checks))
    if report.modp is not None:
        lines.append(f"modp_matrix: {report.modp.text()}")
    return "\n".join(lines)


def _report_result(report) -> JobResult:
    return JobResult(EXIT_OK if report.ok else EXIT_CHECK, report.to_json(), report_text(report))


def run_descend(job: JobSpec) -> JobResult:
    return _report_result(run_family_descent(job.instance(), strict=False))


def run_integral(job: JobSpec) -> JobResult:
    return _report_result(integral_descent(job.instance(), strict=False))


def run_reduce(job: JobSpec) -> JobResult:
    """Integral descent, then the residue matrix and its comparison with ``(0, -1; u^h, 0)``."""
    report = integral_descent(job.instance(), strict=False)
    try:
        modp = reduce_mod_p(report.result.C_final)
    except NotIntegral as exc:
        raise CheckFailure("reduce_mod_p", str(exc)) from exc
    expected = standard_modp(job.p, job.h)
    match = modp == expected
    payload = {"instance": report.instance.to_dict(), "command": "reduce-mod-p",
               "modp_matrix": modp.to_json(), "modp_text": modp.text(),
               "expected": expected.text(), "matches": match,
               "descent_ok": report.ok}
    text = "\n".join([_instance_line(report.instance), f"modp_matrix: {modp.text()}",
                      f"expected:    {expected.text()}", f"matches: {match}"])
    return JobResult(EXIT_OK if match and report.ok else EXIT_CHECK, payload, text)


def _random_unipotent(lams, rng: random.Random, p: int) -> SeriesMatrix2:
    """``(1, f; 0, 1)`` or its transpose with ``f`` in ``p u Z[u]`` of small degree."""
    coeffs = [0] + [p * rng.randint(-p * p, p * p) for _ in range(rng.randint(1, 6))]
    f = lams.E.like(coeffs)
    one, zero = lams.one(), lams.zero()
    if rng.random() < 0.5:
        return SeriesMatrix2(one, f, zero, one)
    return SeriesMatrix2(one, zero, f, one)


def run_verify_monodromy(job: JobSpec) -> JobResult:
    """Monodromy relation for ``C_0`` and ``C_ap``, and its transport under a random change of basis."""
    inst = job.instance()
    lams = inst.lambdas()
    B = monodromy_B_from(lams, inst.h)
    checks = {}
    C0 = build_C_ap(replace(inst, a_p=PadicScalar.zero(inst.p)), lams)
    C = build_C_ap(inst, lams)
    for name, M in (("residual_C0", C0), ("residual_Cap", C)):
        r = monodromy_residual(M, B, lams)
        checks[name] = Check(r.holds, r.stored, f"floor {rational_str(r.floor)}")
    rng = random.Random(job.seed)
    A = _random_unipotent(lams, rng, inst.p)
    r = monodromy_residual(twisted_conjugate(A, C), change_of_basis_B(A, B, lams), lams)
    checks["residual_change_of_basis"] = Check(r.holds, r.stored,
                                               f"floor {rational_str(r.floor)}, seed {job.seed}")
    ok = all(c.passed for c in checks.values())
    payload = {"instance": inst.to_dict(), "command": "verify-monodromy", "seed": job.seed,
               "checks": {k: c.to_dict() for k, c in checks.items()}}
    text = "\n".join([_instance_line(inst), "checks:"] + _checks_text(checks))
    return JobResult(EXIT_OK if ok else EXIT_CHECK, payload, text)


def run_lambda(job: JobSpec) -> JobResult:
    N = INF if job.N is None else job.N
    lams = lambda_factory(job.p, job.D, N)
    named = (("lambda_+", lams.lam_plus), ("lambda_-", lams.lam_minus),
             ("lambda_++", lams.lam_pp), ("lambda", lams.lam))
    payload = {"command": "lambda", "p": job.p, "deg": job.D,
               "prec": rational_str(N), "series": {k: pretty(f) for k, f in named}}
    text = "\n".join(f"{k} = {pretty(f)}" for k, f in named)
    return JobResult(EXIT_OK, payload, text)


def _sweep_one(args):
    job, h, s = args
    one = replace(job, command=job.extra["mode"], h=h,
                  ap=PadicScalar(job.p, s, job.unit, INF))
    rec = {"h": h, "s": s, "ap": _ap_text(one.ap)}
    try:
        res = run_job(one)
    except KisinError as exc:  # pragma: no cover - run_job maps every KisinError
        return rec | {"exit": EXIT_CHECK, "error": str(exc)}
    rec["exit"] = res.code
    if "error" in res.payload:
        rec["error"] = res.payload["error"]
    else:
        rec["rounds"] = res.payload["rounds"]
        rec["failures"] = [k for k, c in res.payload["checks"].items() if not c["pass"]]
        if "modp_matrix" in res.payload:
            rec["modp_matrix"] = res.payload["modp_matrix"]
    return rec


def run_sweep(job: JobSpec) -> JobResult:
    grid = [(job, h, s) for h in job.h_range for s in job.s_range]
    if job.jobs > 1:
        with ProcessPoolExecutor(max_workers=job.jobs) as pool:
            records = list(pool.map(_sweep_one, grid))
    else:
        records = [_sweep_one(g) for g in grid]
    records.sort(key=lambda r: (r["h"], r["s"]))
    codes = {r["exit"] for r in records}
    code = EXIT_OK
    for c in (EXIT_PRECONDITION, EXIT_PRECISION, EXIT_CHECK):
        if c in codes:
            code = c
    lines = [f"h={r['h']} s={r['s']} exit={r['exit']} "
             + (f"error: {r['error']}" if "error" in r else f"rounds={r['rounds']}")
             for r in records]
    return JobResult(code, {"command": "sweep", "p": job.p, "results": records},
                     "\n".join(lines))


_RUNNERS = {
    "descend": run_descend,
    "integral-descend": run_integral,
    "verify-monodromy": run_verify_monodromy,
    "reduce-mod-p": run_reduce,
    "lambda": run_lambda,
    "sweep": run_sweep,
}


def _error(code, kind, exc) -> JobResult:
    return JobResult(code, {"error": kind, "message": str(exc)}, f"error ({kind}): {exc}")


def run_job(job: JobSpec) -> JobResult:
    try:
        return _RUNNERS[job.command](job)
    except (PreconditionViolation, ParameterViolation) as exc:
        return _error(EXIT_PRECONDITION, "precondition", exc)
    except (PrecisionExhausted, NonTermination) as exc:
        return _error(EXIT_PRECISION, "precision", exc)
    except CheckFailure as exc:
        return _error(EXIT_CHECK, "check", exc)


def render(result: JobResult, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(result.payload, indent=2, sort_keys=True)
    return result.text


def main(argv=None) -> int:
    try:
        job = parse_args(sys.argv[1:] if argv is None else argv)
    except UsageError as exc:
        print(f"kisin-descent: error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_PRECONDITION
    result = run_job(job)
    if "error" in result.payload:
        print(f"kisin-descent: {result.text}", file=sys.stderr)
        if job.output == "json":
            print(render(result, "json"))
    else:
        print(render(result, job.output))
    return result.code
