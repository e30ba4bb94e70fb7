"""Command-line front end: check, exp, cesaro, verify, corpus, probe.

Exit codes: 0 success/pass, 1 verdict fails or a check fails, 2 usage or
input error, 3 resource cap exceeded.  With --json, stdout carries exactly
one JSON document; diagnostics go to stderr.  Identical invocations with
identical seeds produce byte-identical JSON output.  The environment
variable OMEGA_SG_CAP overrides the resource cap.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from fractions import Fraction
from xml.sax.saxutils import escape, quoteattr

from .errors import (
    DomainError,
    InvalidOperatorError,
    InvalidVectorError,
    ResourceLimitError,
)
from .operators import (
    DEFAULT_SUPPORT_CAP,
    SequenceVector,
    format_rational,
    load_operator,
    load_vector,
    parse_rational,
)
from .reachability import StructuralFailureError, decide_generation
from .exponential import cesaro_apply, exp_apply
from .verifier import (
    CheckReport,
    check_cesaro_identity,
    check_generator_fd,
    check_semigroup_law,
    probe_exact_failure,
)
from .corpus import get_example, list_examples, run_entry, run_regression

DEFAULT_EPS = "1e-12"
DEFAULT_SEED = 1729
DEFAULT_TRIALS = 50


def _emit(payload: dict, human: str, as_json: bool) -> None:
    if as_json:
        print(json.dumps(payload, sort_keys=True, indent=2))
    else:
        print(human)


def _require_file(path: str) -> str:
    if not os.path.exists(path):
        raise InvalidOperatorError(f"input file does not exist: {path}")
    return path


def _cap_from_env() -> int:
    raw = os.environ.get("OMEGA_SG_CAP")
    if raw is None:
        return DEFAULT_SUPPORT_CAP
    try:
        cap = int(raw)
    except ValueError as exc:
        raise InvalidOperatorError(f"OMEGA_SG_CAP must be an integer, got {raw!r}") from exc
    if cap < 1:
        raise InvalidOperatorError(f"OMEGA_SG_CAP must be >= 1, got {cap}")
    return cap


def _render_verdict_human(verdict) -> str:
    if verdict.generates:
        lines = ["verdict: generates (strongly continuous, even uniformly continuous)"]
        if verdict.m_of_n:
            table = ", ".join(f"m({n})={m}" for n, m in sorted(verdict.m_of_n.items()))
            lines.append(f"m table: {table}")
        rule = verdict.rule
        offs = ", ".join(
            f"residue {r}: n+{o}" if o else f"residue {r}: n"
            for r, o in enumerate(rule.offsets)
        )
        lines.append(f"periodic rows n >= {rule.valid_from} reach at most {offs}")
        return "\n".join(lines)
    cert = verdict.certificate
    return (
        f"verdict: fails structurally at row {verdict.row}\n"
        f"stem: {list(cert.stem)}\n"
        f"cycle: {list(cert.cycle)} (column drift +{cert.weight} per round)"
    )


def _cmd_check(args, cap: int) -> int:
    op = load_operator(_require_file(args.operator))
    rows = [int(r) for r in args.rows.split(",")] if args.rows else []
    verdict = decide_generation(op, rows_to_report=rows, cap=cap)
    _emit(verdict.to_json(), _render_verdict_human(verdict), args.json)
    return 0 if verdict.generates else 1


def _render_report_human(report, float_view: bool) -> str:
    d = report.to_dict(float_view=float_view)
    vals = ", ".join(d["values"])
    return (
        f"values: ({vals})\n"
        f"certified_error: {d['certified_error']}  K: {d['K_used']}  "
        f"lambda: {d['lambda']}  exact: {d['nilpotent']}"
    )


def _cmd_exp(args, cap: int) -> int:
    op = load_operator(_require_file(args.operator))
    x = load_vector(_require_file(args.vector))
    report = exp_apply(
        op, parse_rational(args.t), x, args.n, parse_rational(args.eps),
        allow_negative_t=args.allow_negative_t, cap=cap,
    )
    _emit(report.to_dict(float_view=args.float), _render_report_human(report, args.float), args.json)
    return 0


def _cmd_cesaro(args, cap: int) -> int:
    op = load_operator(_require_file(args.operator))
    x = load_vector(_require_file(args.vector))
    report = cesaro_apply(op, parse_rational(args.t), x, args.n, parse_rational(args.eps), cap=cap)
    _emit(report.to_dict(float_view=args.float), _render_report_human(report, args.float), args.json)
    return 0


def _random_rational(rng: random.Random, lo: int, hi: int) -> Fraction:
    q = rng.randint(1, 8)
    return Fraction(rng.randint(lo * q, hi * q), q)


def _random_vector(rng: random.Random, max_len: int) -> SequenceVector:
    length = rng.randint(0, max_len)
    prefix = tuple(_random_rational(rng, -2, 2) for _ in range(length))
    tail = Fraction(0) if rng.random() < 0.5 else _random_rational(rng, -2, 2)
    return SequenceVector(prefix=prefix, tail=tail)


def _write_junit(path: str, reports: list[CheckReport]) -> None:
    failures = sum(0 if r.passed else 1 for r in reports)
    lines = [
        '<?xml version="1.0" encoding="utf-8"?>',
        f'<testsuite name="omegasg.verify" tests="{len(reports)}" failures="{failures}">',
    ]
    for i, r in enumerate(reports):
        name = quoteattr(f"{i:03d}-{r.name}")
        if r.passed:
            lines.append(f"  <testcase classname=\"omegasg.verify\" name={name}/>")
        else:
            msg = quoteattr(json.dumps(r.to_dict()["failure"], sort_keys=True))
            lines.append(f"  <testcase classname=\"omegasg.verify\" name={name}>")
            lines.append(f"    <failure message={msg}>{escape(r.name)}</failure>")
            lines.append("  </testcase>")
    lines.append("</testsuite>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _cmd_verify(args, cap: int) -> int:
    op = load_operator(_require_file(args.operator))
    eps = parse_rational(args.eps)
    if eps <= 0:
        raise DomainError("eps must be positive")
    verdict = decide_generation(op, cap=cap)
    if not verdict.generates:
        _emit(verdict.to_json(), _render_verdict_human(verdict), args.json)
        return 1

    rng = random.Random(args.seed)
    reports: list[CheckReport] = []
    for _ in range(args.trials):
        s = _random_rational(rng, 0, 2)
        t = _random_rational(rng, 0, 2)
        x = _random_vector(rng, args.n + 2)
        reports.append(check_semigroup_law(op, s, t, x, args.n, 2 * eps, cap=cap))
        if t > 0:
            reports.append(
                check_cesaro_identity(op, t, x, args.n, 2 * eps / t, cap=cap)
            )
    reports.append(check_generator_fd(op, _random_vector(rng, args.n), args.n, cap=cap))

    failures = [r for r in reports if not r.passed]
    payload = {
        "operator": op.to_dict(),
        "seed": args.seed,
        "trials": args.trials,
        "checks": len(reports),
        "failures": [r.to_dict() for r in failures],
        "passed": not failures,
    }
    human = (
        f"{len(reports)} checks, {len(failures)} failures "
        f"(seed {args.seed}, trials {args.trials})"
    )
    _emit(payload, human, args.json)
    if args.junit:
        _write_junit(args.junit, reports)
    return 0 if not failures else 1


def _cmd_corpus(args, cap: int) -> int:
    if args.id:
        records = [run_entry(get_example(args.id))]
    else:
        records = run_regression()
    ok = all(r["ok"] for r in records)
    human_lines = []
    for r in records:
        status = "PASS" if r["ok"] else "FAIL"
        human_lines.append(f"{r['id']}: {status} ({'; '.join(r['details'])})")
    _emit({"entries": records, "passed": ok}, "\n".join(human_lines), args.json)
    return 0 if ok else 1


def _cmd_probe(args, cap: int) -> int:
    op = load_operator(_require_file(args.operator))
    witness = probe_exact_failure(op, args.row, args.m, args.kmax, cap=cap)
    if witness is None:
        payload = {"witness": None, "row": args.row, "m": args.m, "K_max": args.kmax}
        _emit(payload, f"no witness up to k={args.kmax} (inconclusive)", args.json)
        return 0
    payload = {"witness": witness.to_dict(), "row": args.row, "m": args.m, "K_max": args.kmax}
    human = (
        f"witness: power k={witness.k} of row {args.row} has entry "
        f"{format_rational(witness.value)} at column {witness.column} > m={args.m}"
    )
    _emit(payload, human, args.json)
    return 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="omegasg",
        description=(
            "Decide semigroup generation for row-finite operators on the "
            "space of all scalar sequences, and evaluate exp(tA) with "
            "certified truncation error."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="decide generation, print the verdict")
    p.add_argument("operator", help="operator JSON file")
    p.add_argument("--rows", help="comma-separated rows for the m table")
    p.add_argument("--json", action="store_true")
    p.set_defaults(handler=_cmd_check)

    for name, helptext in (
        ("exp", "evaluate exp(tA)x coordinatewise"),
        ("cesaro", "evaluate the Cesàro mean of the orbit"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("operator", help="operator JSON file")
        p.add_argument("vector", help="vector JSON file")
        p.add_argument("--t", required=True, help="time, rational like 2, 7/3 or 0.5")
        p.add_argument("--n", type=int, default=8, help="coordinates 1..n (default 8)")
        p.add_argument("--eps", default=DEFAULT_EPS, help="tail budget (default 1e-12)")
        p.add_argument("--float", action="store_true", help="decimal view, error-aware digits")
        p.add_argument("--json", action="store_true")
        if name == "exp":
            p.add_argument("--allow-negative-t", action="store_true")
            p.set_defaults(handler=_cmd_exp)
        else:
            p.set_defaults(handler=_cmd_cesaro)

    p = sub.add_parser("verify", help="run the property-check harness")
    p.add_argument("operator", help="operator JSON file")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--eps", default=DEFAULT_EPS)
    p.add_argument("--junit", help="write a junit-style XML summary to this path")
    p.add_argument("--json", action="store_true")
    p.set_defaults(handler=_cmd_verify)

    p = sub.add_parser("corpus", help="run the built-in regression corpus")
    p.add_argument("--id", help="run a single entry")
    p.add_argument("--json", action="store_true")
    p.set_defaults(handler=_cmd_corpus)

    p = sub.add_parser("probe", help="exact search for mass beyond column m in powers")
    p.add_argument("operator", help="operator JSON file")
    p.add_argument("--row", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--kmax", type=int, required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(handler=_cmd_probe)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cap = _cap_from_env()
        return args.handler(args, cap)
    except json.JSONDecodeError as exc:
        print(f"error: malformed JSON: {exc.msg} at line {exc.lineno} column {exc.colno}",
              file=sys.stderr)
        return 2
    except (InvalidOperatorError, InvalidVectorError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ResourceLimitError as exc:
        print(f"error: resource cap exceeded: {exc}", file=sys.stderr)
        return 3
    except StructuralFailureError as exc:
        cert = exc.certificate
        payload = {
            "verdict": "fails",
            "row": exc.starting_row,
            "witness": cert.to_json(),
        }
        as_json = bool(getattr(args, "json", False))
        _emit(payload, f"structural failure: {exc}", as_json)
        return 1


if __name__ == "__main__":
    sys.exit(main())
