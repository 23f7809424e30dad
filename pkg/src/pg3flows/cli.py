"""Command-line front door.

Subcommands: classify, replay {a1,c1,c1-lemma,c3,c4,c5,discrete},
clifford parallel, audit spread, limits, fixed-lines.  Reports are JSON
with a schema_version field; exit code 0 means the verification passed,
1 means the report records a failure, 2 means a usage or config error.
"""

import argparse
import json
import sys
from typing import Optional

import numpy as np

from .clifford import CLIFFORD, clifford_parallel, pencil_collapse_witness, spread_audit
from .dynamics import (
    Schedule,
    line_orbit_limit,
    point_orbit_limit,
    replay_a1,
    replay_c1,
    replay_c3,
    replay_c4,
    replay_c5,
    replay_discrete,
    replay_lemma_c1,
)
from .errors import NotClassifiable, PG3Error, PreconditionError
from .flows import (
    FlowParams,
    JordanCase,
    OneParamFlow,
    classify_generator,
    compactness_status,
    fixed_lines,
)
from .projective import Line, ProjPoint

SCHEMA_VERSION = 1


class UsageError(Exception):
    pass


def _parse_params(text: str) -> dict:
    """Parse a key=value list like ``a=1,b=1,c=2`` into a float dict."""
    out = {}
    if not text:
        return out
    for item in text.split(","):
        if "=" not in item:
            raise UsageError(f"malformed params entry {item!r}; expected key=value")
        key, _, value = item.partition("=")
        key = key.strip()
        if key not in ("a", "b", "c", "d"):
            raise UsageError(f"unknown flow parameter {key!r}")
        try:
            out[key] = float(value)
        except ValueError:
            raise UsageError(f"non-numeric value for {key!r}: {value!r}")
    return out


def _load_json(text: Optional[str], path: Optional[str], what: str):
    if text is None and path is None:
        raise UsageError(f"missing {what}")
    if text is not None and path is not None:
        raise UsageError(f"give {what} either inline or as a file, not both")
    if path is not None:
        try:
            with open(path) as fh:
                text = fh.read()
        except OSError as exc:
            raise UsageError(f"cannot read {path}: {exc}")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"malformed JSON for {what}: {exc}")


def _parse_schedule(text: Optional[str]) -> Optional[Schedule]:
    if text is None:
        return None
    kind, _, rest = text.partition(":")
    kind = kind.strip()
    fields = {}
    if rest:
        for item in rest.split(","):
            key, _, value = item.partition("=")
            fields[key.strip()] = value.strip()
    try:
        if kind == "geometric":
            return Schedule.geometric(
                t0=float(fields.get("t0", 0.5)),
                ratio=float(fields.get("ratio", 1.3)),
                steps=int(fields.get("steps", 40)),
                direction=fields.get("direction", "forward"),
            )
        if kind == "discrete":
            return Schedule.discrete(
                t0=float(fields.get("t0", 1.0)),
                steps=int(fields.get("steps", 200)),
                direction=fields.get("direction", "forward"),
            )
    except ValueError as exc:
        raise UsageError(f"bad schedule: {exc}")
    raise UsageError(f"unknown schedule kind {kind!r}")


def _flow_from_args(args) -> OneParamFlow:
    """Accept either case+params or a raw generator matrix (classified)."""
    spec = None
    if getattr(args, "flow", None) or getattr(args, "flow_file", None):
        spec = _load_json(args.flow, args.flow_file, "flow spec")
    elif getattr(args, "case", None):
        spec = {"case": args.case, "params": _parse_params(args.params or "")}
    if spec is None:
        raise UsageError("no flow given; use --flow/--flow-file or --case/--params")
    if "matrix" in spec:
        matrix = np.asarray(spec["matrix"], dtype=float)
        if matrix.shape != (4, 4):
            raise UsageError("generator matrix must be 4x4")
        return classify_generator(matrix).flow()
    if "case" in spec:
        try:
            case = JordanCase(spec["case"])
        except ValueError:
            raise UsageError(f"unknown case {spec['case']!r}")
        try:
            return OneParamFlow(case, FlowParams(**spec.get("params", {})))
        except TypeError as exc:
            raise UsageError(f"bad flow params: {exc}")
    raise UsageError("flow spec needs either 'case' or 'matrix'")


def _emit(report: dict, args, passed: bool) -> int:
    text = json.dumps(report, sort_keys=True, indent=2)
    if getattr(args, "output", None):
        with open(args.output, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0 if passed else 1


# ---------------------------------------------------------------------------
# subcommand handlers


def _cmd_classify(args) -> int:
    spec = _load_json(args.matrix, args.matrix_file, "generator matrix")
    if isinstance(spec, dict) and "matrix" in spec:
        spec = spec["matrix"]
    matrix = np.asarray(spec, dtype=float)
    if matrix.shape != (4, 4):
        raise UsageError("generator matrix must be 4x4")
    try:
        result = classify_generator(matrix, tol=args.tol)
    except NotClassifiable as exc:
        return _emit({"schema_version": SCHEMA_VERSION, "error": str(exc)},
                     args, passed=False)
    report = result.to_dict()
    report["schema_version"] = SCHEMA_VERSION
    if args.compactness:
        report["compactness"] = compactness_status(result.flow()).to_dict()
    return _emit(report, args, passed=True)


def _cmd_replay(args) -> int:
    which = args.which
    if which == "a1":
        report = replay_a1(FlowParams(**_parse_params(args.params or "a=1,b=1,c=2")),
                           samples=args.samples, seed=args.seed)
    elif which == "c1":
        report = replay_c1(args.n_max, seed=args.seed)
    elif which == "c1-lemma":
        report = replay_lemma_c1(args.n_max, sequences=args.sequences, seed=args.seed)
    elif which == "c3":
        params = _parse_params(args.params or "a=1")
        report = replay_c3(params.get("a", 1.0), grid=args.grid)
    elif which == "c4":
        params = _parse_params(args.params or "b=1,c=2")
        report = replay_c4(params.get("b", 1.0), params.get("c", 2.0), grid=args.grid)
    elif which == "c5":
        report = replay_c5(FlowParams(**_parse_params(args.params or "b=1,c=2,d=3")),
                           samples=args.samples, seed=args.seed)
    elif which == "discrete":
        report = replay_discrete(
            FlowParams(**_parse_params(args.params or "b=1,c=2,d=3")),
            samples=args.samples, seed=args.seed)
    else:  # pragma: no cover - argparse restricts choices
        raise UsageError(f"unknown replay {which!r}")
    return _emit(report.to_dict(), args, passed=report.passed)


def _cmd_clifford_parallel(args) -> int:
    point = _load_json(args.point, None, "point")
    line = _load_json(args.line, None, "line")
    try:
        p = ProjPoint(np.asarray(point, dtype=float))
        l = Line(np.asarray(line, dtype=float).reshape(4, 2))
    except (ValueError, TypeError) as exc:
        raise UsageError(f"bad point/line: {exc}")
    m = clifford_parallel(p, l)
    report = {
        "schema_version": SCHEMA_VERSION,
        "frame": m.frame.tolist(),
        "plucker": m.plucker.tolist(),
    }
    return _emit(report, args, passed=True)


def _cmd_audit_spread(args) -> int:
    if args.witness == "clifford":
        witness = CLIFFORD
    elif args.witness == "pencil-collapse":
        witness = pencil_collapse_witness()
    else:  # pragma: no cover
        raise UsageError(f"unknown witness {args.witness!r}")
    report = spread_audit(
        witness,
        samples=args.samples,
        seed=args.seed,
        tol=args.tol,
        equivariance_maps=args.equivariance_maps,
        dual_probe_every=args.dual_probe_every,
    )
    return _emit(report.to_dict(), args, passed=report.passed)


def _cmd_limits(args) -> int:
    flow = _flow_from_args(args)
    schedule = _parse_schedule(args.schedule)
    if args.line is not None:
        try:
            line = Line(np.asarray(_load_json(args.line, None, "line"),
                                   dtype=float).reshape(4, 2))
        except (ValueError, TypeError) as exc:
            raise UsageError(f"bad line: {exc}")
        report = line_orbit_limit(flow, line, schedule, tol=args.tol)
    elif args.point is not None:
        try:
            point = ProjPoint(np.asarray(_load_json(args.point, None, "point"),
                                         dtype=float))
        except (ValueError, TypeError) as exc:
            raise UsageError(f"bad point: {exc}")
        report = point_orbit_limit(flow, point, schedule, tol=args.tol)
    else:
        raise UsageError("limits needs --line or --point")
    return _emit(report.to_dict(), args, passed=report.converged)


def _cmd_fixed_lines(args) -> int:
    flow = _flow_from_args(args)
    result = fixed_lines(flow, tol=args.tol)
    report = {
        "schema_version": SCHEMA_VERSION,
        "count": len(result.lines),
        "lines": [l.plucker.tolist() for l in result.lines],
        "continuum": bool(result.continuum),
    }
    return _emit(report, args, passed=True)


# ---------------------------------------------------------------------------
# parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pg3flows", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_output(p):
        p.add_argument("--output", help="write the JSON report to this path "
                       "(default: stdout)")

    def add_flow(p):
        p.add_argument("--flow", help='flow spec JSON, {"case":...,"params":...} '
                       'or {"matrix": [[...]]}')
        p.add_argument("--flow-file", help="path to a flow spec JSON file")
        p.add_argument("--case", choices=[c.value for c in JordanCase],
                       help="canonical case tag (with --params)")
        p.add_argument("--params", help="flow parameters as key=value list, "
                       "e.g. b=1,c=2,d=3")

    p = sub.add_parser("classify", help="classify a 4x4 generator matrix")
    p.add_argument("--matrix", help="generator matrix as a JSON 4x4 array")
    p.add_argument("--matrix-file", help="path to a JSON matrix file")
    p.add_argument("--tol", type=float, default=1e-6,
                   help="eigenvalue clustering tolerance (default 1e-6)")
    p.add_argument("--compactness", action="store_true",
                   help="also report the closure/compactness decision")
    add_output(p)
    p.set_defaults(handler=_cmd_classify)

    p = sub.add_parser("replay", help="replay a case argument numerically")
    p.add_argument("which", choices=["a1", "c1", "c1-lemma", "c3", "c4", "c5",
                                     "discrete"])
    p.add_argument("--params", help="flow parameters as key=value list")
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-max", type=int, default=1000,
                   help="sequence length for the c1 replays")
    p.add_argument("--sequences", type=int, default=8,
                   help="random sequences for the c1 lemma replay")
    p.add_argument("--grid", type=int, default=201,
                   help="plane-grid size for the c3/c4 censuses")
    add_output(p)
    p.set_defaults(handler=_cmd_replay)

    p = sub.add_parser("clifford", help="Clifford parallelism queries")
    csub = p.add_subparsers(dest="clifford_command", required=True)
    cp = csub.add_parser("parallel", help="parallel of a line through a point")
    cp.add_argument("--point", required=True, help="JSON 4-vector")
    cp.add_argument("--line", required=True, help="JSON 4x2 spanning pair (columns)")
    add_output(cp)
    cp.set_defaults(handler=_cmd_clifford_parallel)

    p = sub.add_parser("audit", help="sample-based parallelism audits")
    asub = p.add_subparsers(dest="audit_command", required=True)
    ap = asub.add_parser("spread", help="spread/dual-spread audit of a witness")
    ap.add_argument("--witness", choices=["clifford", "pencil-collapse"],
                    default="clifford")
    ap.add_argument("--samples", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--tol", type=float, default=1e-8)
    ap.add_argument("--equivariance-maps", type=int, default=0)
    ap.add_argument("--dual-probe-every", type=int, default=1)
    add_output(ap)
    ap.set_defaults(handler=_cmd_audit_spread)

    p = sub.add_parser("limits", help="orbit limit of a line or point")
    add_flow(p)
    p.add_argument("--line", help="JSON 4x2 spanning pair")
    p.add_argument("--point", help="JSON 4-vector")
    p.add_argument("--schedule", help="geometric:t0=0.5,ratio=1.3,steps=40 or "
                   "discrete:t0=1,steps=200")
    p.add_argument("--tol", type=float, default=1e-9)
    add_output(p)
    p.set_defaults(handler=_cmd_limits)

    p = sub.add_parser("fixed-lines", help="lines fixed by a flow")
    add_flow(p)
    p.add_argument("--tol", type=float, default=1e-8)
    add_output(p)
    p.set_defaults(handler=_cmd_fixed_lines)

    return parser


def execute(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.handler(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except PreconditionError as exc:
        print(f"precondition error: {exc}", file=sys.stderr)
        return 2
    except PG3Error as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(execute())


if __name__ == "__main__":
    main()
