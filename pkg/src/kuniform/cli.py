"""Command line interface.

Exit status: 0 on success, 1 when a verification fails, 2 on usage errors
(including parameter combinations outside the implemented constructions).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import oarray
from .ffield import field_of_order
from .qoa import NotCoveredError, QuantumOA, assemble_state, plan
from .qstate import SparseState
from .verify import DEFAULT_TOL, appendix_suite, is_k_uniform, m2_counterexample, qoa_check


class UsageError(Exception):
    pass


def dumps(obj) -> str:
    return json.dumps(obj, separators=(",", ":"), allow_nan=False) + "\n"


def _emit(text: str, output: Path | None) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        output.write_text(text)


def _report_json(report, timing: bool) -> dict:
    out = report.to_json()
    if not timing:
        out.pop("wall_time")
    return out


def _load(path: Path) -> dict:
    try:
        return json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None


def cmd_build(args) -> int:
    try:
        p = plan(args.N, args.d, args.k)
    except NotCoveredError as exc:
        raise UsageError(str(exc)) from None
    if args.m is not None and p.kwargs.get("m") != args.m:
        raise UsageError(f"(N={args.N}, d={args.d}, k={args.k}) uses m={p.kwargs.get('m')}, not m={args.m}")
    q = p.run()
    _emit(dumps(q.to_json()), args.output)
    return 0


def cmd_verify(args) -> int:
    obj = _load(args.input)
    result: dict = {}
    passed = True
    if "rows" in obj:
        q = QuantumOA.from_json(obj)
        k = q.k if args.k is None else args.k
        rep_q = qoa_check(q, args.tol, k=k, workers=args.threads)
        rep_s = is_k_uniform(assemble_state(q), k, args.tol, workers=args.threads)
        result["qoa"] = _report_json(rep_q, args.timing)
        result["state"] = _report_json(rep_s, args.timing)
        passed = rep_q.passed and rep_s.passed
    else:
        if args.k is None:
            raise UsageError("--k is required when verifying a bare state")
        state = SparseState.from_json(obj)
        rep = is_k_uniform(state, args.k, args.tol, workers=args.threads)
        result["state"] = _report_json(rep, args.timing)
        passed = rep.passed
    result["passed"] = passed
    _emit(dumps(result), args.output)
    return 0 if passed else 1


def cmd_oa(args) -> int:
    if args.construction == "full":
        oa = oarray.full_factorial(args.d, args.N)
    elif args.construction == "zerosum":
        oa = oarray.zero_sum_oa(args.d, args.N, args.l)
    else:
        oa = oarray.vandermonde_oa(field_of_order(args.d), extended=args.extended)
    if args.check:
        if not oarray.strength_check(oa, oa.strength):
            sys.stderr.write(f"{oa!r} failed its strength check\n")
            return 1
    text = oa.to_text() if args.format == "text" else dumps(oa.to_json())
    _emit(text, args.output)
    return 0


def cmd_suite(args) -> int:
    results = appendix_suite(tol=args.tol)
    subset, _, dev = m2_counterexample()
    identities_ok = all(r.passed for r in results)
    control_ok = dev > 0.1
    out = {
        "identities": [vars(r) for r in results],
        "identities_passed": identities_ok,
        "m2_counterexample": {"subset": list(subset), "deviation": dev, "excluded": control_ok},
        "passed": identities_ok and control_ok,
    }
    _emit(dumps(out), args.output)
    return 0 if out["passed"] else 1


def cmd_export(args) -> int:
    obj = _load(args.input)
    if "rows" not in obj:
        raise UsageError("export expects a QOA JSON file (with 'rows')")
    state = assemble_state(QuantumOA.from_json(obj))
    _emit(dumps(state.to_json()), args.output)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kuniform", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="verb", required=True)

    b = sub.add_parser("build", help="build a QOA(r, N, d, k) and print it as JSON")
    b.add_argument("--N", type=int, required=True, help="number of sites")
    b.add_argument("--d", type=int, required=True, help="local dimension (prime power)")
    b.add_argument("--k", type=int, required=True, choices=(2, 3), help="strength")
    b.add_argument("--m", type=int, help="assert the number of entangled blocks")
    b.add_argument("--output", type=Path)
    b.set_defaults(func=cmd_build)

    v = sub.add_parser("verify", help="certify a QOA or state JSON file")
    v.add_argument("--input", type=Path, required=True)
    v.add_argument("--k", type=int, help="strength (defaults to the QOA's own)")
    v.add_argument("--tol", type=float, default=DEFAULT_TOL)
    v.add_argument("--threads", type=int, default=1, help="worker threads over subsets")
    v.add_argument("--timing", action="store_true", help="include wall times in the report")
    v.add_argument("--output", type=Path)
    v.set_defaults(func=cmd_verify)

    o = sub.add_parser("oa", help="generate a classical orthogonal array")
    o.add_argument("--construction", choices=("full", "zerosum", "vandermonde"), required=True)
    o.add_argument("--d", type=int, required=True)
    o.add_argument("--N", type=int, help="columns (full, zerosum)")
    o.add_argument("--l", type=int, default=0, help="digit-sum residue (zerosum)")
    o.add_argument("--extended", action="store_true", help="append column j (vandermonde, d = 2^t)")
    o.add_argument("--format", choices=("json", "text"), default="json")
    o.add_argument("--check", action="store_true", help="exit 1 unless the declared strength checks out")
    o.add_argument("--output", type=Path)
    o.set_defaults(func=cmd_oa)

    s = sub.add_parser("suite", help="run the trace-identity suite and the m = 2 negative control")
    s.add_argument("--tol", type=float, default=1e-12)
    s.add_argument("--output", type=Path)
    s.set_defaults(func=cmd_suite)

    e = sub.add_parser("export", help="convert a QOA JSON file to its assembled state")
    e.add_argument("--input", type=Path, required=True)
    e.add_argument("--output", type=Path)
    e.set_defaults(func=cmd_export)
    return ap


def run(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.verb == "oa" and args.construction in ("full", "zerosum") and args.N is None:
        ap.error("--N is required for the full and zerosum constructions")
    if getattr(args, "threads", 1) < 1:
        ap.error("--threads must be >= 1")
    try:
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"kuniform {args.verb}: {exc}\n")
        return 2
    except ValueError as exc:
        sys.stderr.write(f"kuniform {args.verb}: {exc}\n")
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
