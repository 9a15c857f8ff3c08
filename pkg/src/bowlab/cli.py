"""Command-line front end.

Subcommands wrap the library one capability each: parse (DSL
validation and canonical output), solve (moment fiber search),
stability (semistability verdict at a point), dim (expected smooth
dimension), reduce (cobalanced quotient to a framed representation),
check-empty (necessary emptiness condition plus optional solver
evidence), selftest (pinned small examples).

All structured output is JSON with complex entries as [re, im] pairs.
Runs are deterministic: the same input, seed, and flags produce
byte-identical output.  BOWLAB_SEED sets the default seed.

Exit codes: 0 success, 1 domain error (bad input data, failed solve,
non-cobalanced reduce target), 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .diagrams import (
    BowDiagram,
    diagram_to_json_dict,
    local_emptiness_check,
    parse_bow_diagram,
    serialize,
)
from .linalg import DEFAULT_TOL, Tolerances, matrix_to_json
from .quiver import StabilityVerdict, quiver_point_to_json_dict, rep_moment_map
from .reduction import gauge_fix_H, to_quiver_point
from .solve import SolveConfig
from .total_space import (
    FiberSolveReport,
    InfeasibilityEvidence,
    TotalSpacePoint,
    check_semistable,
    expected_smooth_dimension,
    point_from_json_dict,
    point_to_json_dict,
    solve_fiber,
)

__all__ = ["RunConfig", "main"]


@dataclass(frozen=True)
class RunConfig:
    seed: int
    n_starts: int
    tolerances: Tolerances
    output_format: str  # "json" or "table"

    def __post_init__(self):
        if self.n_starts < 1:
            raise ValueError("n_starts must be at least 1")
        if self.output_format not in ("json", "table"):
            raise ValueError(f"unknown output format {self.output_format!r}")


def _default_seed() -> int:
    return int(os.environ.get("BOWLAB_SEED", "0"))


def _read_diagram(path: str) -> BowDiagram:
    with open(path, encoding="utf-8") as fh:
        return parse_bow_diagram(fh.read())


def _read_point(d: BowDiagram, path: str) -> TotalSpacePoint:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if isinstance(data, dict) and "point" in data:
        data = data["point"]  # accept solve-report files directly
    try:
        return point_from_json_dict(d, data)
    except (KeyError, IndexError, TypeError) as exc:
        raise ValueError(f"point file {path!r} does not match the diagram: {exc}")


def _per_interval(parser, d: BowDiagram, text: str | None, cast, what: str) -> dict:
    names = d.bow.intervals
    if text is None:
        return {name: cast("0") for name in names}
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != len(names):
        parser.error(f"--{what} needs {len(names)} comma-separated values "
                     f"(intervals {', '.join(names)}), got {len(parts)}")
    try:
        return {name: cast(p) for name, p in zip(names, parts)}
    except ValueError as exc:
        parser.error(f"--{what}: {exc}")


def _cast_weight(text: str):
    try:
        return int(text)
    except ValueError:
        return Fraction(text)


def _dump(data) -> str:
    return json.dumps(data, indent=2)


def _emit(text: str):
    sys.stdout.write(text + "\n")


def _report_json(d: BowDiagram, r: FiberSolveReport) -> dict:
    return {
        "status": "solved",
        "residual_norm": r.residual_norm,
        "iterations": r.iterations,
        "open_conditions_ok": r.open_conditions_ok,
        "seed": r.seed,
        "start_index": r.start_index,
        "point": point_to_json_dict(d, r.point),
    }


def _evidence_json(ev: InfeasibilityEvidence) -> dict:
    return {
        "status": "no-open-solution",
        "note": "evidence, not proof",
        "n_starts": ev.n_starts,
        "failed_starts": ev.n_starts,
        "best_residual": ev.best_residual,
        "seed": ev.seed,
        "starts": [
            {
                "start_index": s.start_index,
                "converged": s.converged,
                "residual_norm": s.residual_norm,
                "iterations": s.iterations,
                "open_conditions_ok": s.open_conditions_ok,
            }
            for s in ev.starts
        ],
    }


def _verdict_json(v: StabilityVerdict) -> dict:
    out = {"kind": v.kind, "clause": v.clause, "witness": None}
    if v.witness is not None:
        out["witness"] = {
            f"{seg.interval}:{seg.index}": {
                "dim": sub.dim,
                "basis": matrix_to_json(sub.basis),
            }
            for seg, sub in sorted(v.witness.parts.items(),
                                   key=lambda kv: (kv[0].interval, kv[0].index))
        }
    return out


def cmd_parse(args) -> int:
    d = _read_diagram(args.diagram)
    if args.dsl:
        sys.stdout.write(serialize(d))
    else:
        _emit(_dump(diagram_to_json_dict(d)))
    return 0


def cmd_solve(args) -> int:
    d = _read_diagram(args.diagram)
    parser = args._parser
    lam = _per_interval(parser, d, getattr(args, "lam"), complex, "lambda")
    outcome = solve_fiber(d, lam, seed=args.seed, n_starts=args.starts,
                          cfg=SolveConfig())
    if isinstance(outcome, FiberSolveReport):
        if args.format == "table":
            _emit(f"solved: residual {outcome.residual_norm:.3e} after "
                  f"{outcome.iterations} iterations (start {outcome.start_index})")
        else:
            _emit(_dump(_report_json(d, outcome)))
        return 0
    if args.format == "table":
        _emit(f"no open solution in {outcome.n_starts} starts "
              f"(best residual {outcome.best_residual:.3e}; evidence, not proof)")
    else:
        _emit(_dump(_evidence_json(outcome)))
    return 1


def cmd_stability(args) -> int:
    d = _read_diagram(args.diagram)
    p = _read_point(d, args.point)
    theta = _per_interval(args._parser, d, args.theta, _cast_weight, "theta")
    verdict = check_semistable(d, p, theta, mode=args.mode, stable=args.stable)
    if args.format == "table":
        name = "stable" if args.stable else "semistable"
        _emit(f"{name} check ({args.mode}): {verdict.kind}"
              + (f" [{verdict.clause} clause]" if verdict.clause else ""))
    else:
        _emit(_dump(_verdict_json(verdict)))
    return 0


def cmd_dim(args) -> int:
    d = _read_diagram(args.diagram)
    _emit(str(expected_smooth_dimension(d)))
    return 0


def cmd_reduce(args) -> int:
    d = _read_diagram(args.diagram)
    p = _read_point(d, args.point)
    rep = to_quiver_point(gauge_fix_H(d, p))
    if args.format == "table":
        def mag(m):
            return float(np.max(np.abs(m))) if m.size else 0.0
        for i in rep.quiver.vertices:
            _emit(f"vertex {i}: v={rep.v[i]}, w={rep.w[i]}, "
                  f"|I|={mag(rep.I[i]):.3e}, |J|={mag(rep.J[i]):.3e}")
        for k, (t, h) in enumerate(rep.quiver.arrows):
            _emit(f"arrow {t} -> {h}: |x|={mag(rep.x[k]):.3e}, "
                  f"|y|={mag(rep.y[k]):.3e}")
    else:
        _emit(_dump(quiver_point_to_json_dict(rep)))
    return 0


def cmd_check_empty(args) -> int:
    d = _read_diagram(args.diagram)
    violations = local_emptiness_check(d)
    out = {
        "necessary_condition": "fail" if violations else "pass",
        "violations": [
            {
                "interval": v.interval,
                "x_index": v.x_index,
                "config": v.config,
                "v0": v.v0,
                "bound": v.bound,
            }
            for v in violations
        ],
        "solver_evidence": None,
    }
    failed = None
    if args.starts > 0:
        lam = _per_interval(args._parser, d, getattr(args, "lam"), complex, "lambda")
        outcome = solve_fiber(d, lam, seed=args.seed, n_starts=args.starts,
                              cfg=SolveConfig())
        if isinstance(outcome, FiberSolveReport):
            out["solver_evidence"] = {"found_solution": True,
                                      "residual_norm": outcome.residual_norm,
                                      "start_index": outcome.start_index}
            failed = 0
        else:
            out["solver_evidence"] = {"found_solution": False,
                                      "failed_starts": outcome.n_starts,
                                      "n_starts": outcome.n_starts,
                                      "best_residual": outcome.best_residual,
                                      "note": "evidence, not proof"}
            failed = outcome.n_starts
    if args.format == "table":
        line = f"necessary condition: {out['necessary_condition']}"
        if args.starts > 0:
            if failed == 0:
                line += "; solver evidence: found a solution"
            else:
                line += f"; solver evidence: {failed}/{args.starts} starts failed"
        _emit(line)
    else:
        _emit(_dump(out))
    return 0


def _selftest_tstar_p1(lines: list) -> bool:
    d = parse_bow_diagram("bow { wavy s [1, 1, 1]; }")
    ok = True

    dim = expected_smooth_dimension(d)
    passed = dim == 2
    lines.append(("expected dimension 2", passed))
    ok &= passed

    outcome = solve_fiber(d, {"s": 0.0}, seed=_default_seed(), n_starts=10)
    solved = isinstance(outcome, FiberSolveReport) and outcome.residual_norm < 1e-10
    lines.append(("A1 bow [1,1,1] fiber solve at lambda=0", solved))
    ok &= solved
    if not solved:
        return False

    verdict = check_semistable(d, outcome.point, {"s": 1}, mode="exact01")
    reduced = gauge_fix_H(d, outcome.point)
    qp = to_quiver_point(reduced)
    mu = rep_moment_map(qp)
    ij_zero = float(np.max(np.abs(mu["s"]))) < 1e-9
    j_nonzero = float(np.linalg.norm(qp.J["s"])) > 1e-9
    transport = verdict.kind != "semistable" or (ij_zero and j_nonzero)
    lines.append(("reduced point has IJ = 0, J != 0 when semistable", transport))
    ok &= transport
    return ok


def _selftest_empty_example(lines: list) -> bool:
    d = parse_bow_diagram("bow { wavy a [2]; wavy b [5, 2]; edge a -> b; }")
    no_violation = not local_emptiness_check(d)
    lines.append(("2-5-2 passes the counting condition", no_violation))
    outcome = solve_fiber(d, {"a": 0.0, "b": 0.0}, seed=_default_seed(), n_starts=10)
    empty = isinstance(outcome, InfeasibilityEvidence)
    lines.append(("2-5-2 fiber solve finds no open solution", empty))
    return no_violation and empty


def _selftest_roundtrips(lines: list) -> bool:
    from .triangles import (
        hurtubise_to_triangle,
        random_rect_form,
        random_square_form,
        triangle_to_hurtubise,
    )

    ok = True
    for v1, v2 in ((1, 1), (2, 2), (2, 3), (3, 2)):
        worst = 0.0
        for k in range(10):
            rng = np.random.default_rng([_default_seed(), v1, v2, k])
            if v1 == v2:
                f = random_square_form(rng, v1)
            else:
                f = random_rect_form(rng, v1, v2)
            g = triangle_to_hurtubise(hurtubise_to_triangle(f))
            if v1 == v2:
                err = max(np.max(np.abs(f.u - g.u)), np.max(np.abs(f.h - g.h)),
                          np.max(np.abs(f.I - g.I)), np.max(np.abs(f.J - g.J)))
            else:
                err = max(np.max(np.abs(f.u - g.u)), np.max(np.abs(f.eta - g.eta)))
            worst = max(worst, float(err))
        passed = worst < 1e-9
        lines.append((f"normal form round-trip at dims ({v1}, {v2})", passed))
        ok &= passed
    return ok


def cmd_selftest(args) -> int:
    lines: list = []
    all_ok = True
    for runner in (_selftest_tstar_p1, _selftest_empty_example, _selftest_roundtrips):
        all_ok &= runner(lines)
    for name, passed in lines:
        _emit(f"{'PASS' if passed else 'FAIL'}  {name}")
    _emit("self-test " + ("passed" if all_ok else "FAILED"))
    return 0 if all_ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bowlab",
        description="Bow diagram calculus: moment fibers, stability, reduction.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_format(p):
        p.add_argument("--format", choices=("json", "table"), default="json",
                       help="output format (default json)")

    p = sub.add_parser("parse", help="validate a diagram file, print canonical form")
    p.add_argument("diagram", help="path to a diagram DSL file")
    p.add_argument("--dsl", action="store_true",
                   help="print canonical DSL text instead of JSON")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("solve", help="search the moment fiber over lambda")
    p.add_argument("diagram")
    p.add_argument("--lambda", dest="lam", default=None, metavar="C0,C1,...",
                   help="per-interval deformation values, declaration order")
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--starts", type=int, default=20)
    add_format(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("stability", help="semistability verdict at a point")
    p.add_argument("diagram")
    p.add_argument("point", help="point JSON file (solve output accepted)")
    p.add_argument("--theta", default=None, metavar="T0,T1,...",
                   help="per-interval weights, declaration order")
    p.add_argument("--mode", choices=("exact01", "heuristic"), default="heuristic")
    p.add_argument("--stable", action="store_true",
                   help="strict-inequality variant (stability, not semistability)")
    add_format(p)
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("dim", help="expected smooth dimension of the diagram")
    p.add_argument("diagram")
    p.set_defaults(func=cmd_dim)

    p = sub.add_parser("reduce", help="gauge-fix a cobalanced point, print its "
                                      "framed representation")
    p.add_argument("diagram")
    p.add_argument("point")
    add_format(p)
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("check-empty", help="necessary emptiness condition, "
                                           "optional solver evidence")
    p.add_argument("diagram")
    p.add_argument("--starts", type=int, default=0,
                   help="run this many solver starts as extra evidence")
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--lambda", dest="lam", default=None, metavar="C0,C1,...")
    add_format(p)
    p.set_defaults(func=cmd_check_empty)

    p = sub.add_parser("selftest", help="run the pinned small examples")
    p.set_defaults(func=cmd_selftest)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args._parser = parser
    try:
        return args.func(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, TypeError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
