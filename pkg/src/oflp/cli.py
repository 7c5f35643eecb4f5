"""Command-line front end.

Subcommands: run, opt, check-sp, check-gsp, sweep, lb-verify, fuzz.
Instance files are JSON documents (see `serialize`).  Exit codes:
0 success, 1 error or failed bound assertion, 2 a deviation was found by
a check command, 64 usage error.  OFLP_SEED sets the default seed.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys

from .experiments import (
    DUAL_KIND,
    bound_fuzz,
    consistency_bound,
    evaluate_instance,
    lb_verify,
    robustness_bound,
    tradeoff_sweep,
)
from .game_checks import check_coalition, check_unilateral
from .serialize import InstanceError, parse_instance
from .spaces import CIRCLE, SEGMENT, SQUARE, TREE, SpaceError, TreePoint
from .welfare import ContractError, optimal_location

USAGE_ERROR = 64
VIOLATION = 2

_KINDS = (SEGMENT, SQUARE, CIRCLE, TREE, DUAL_KIND)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(USAGE_ERROR)


def _jsonify(obj):
    """JSON-safe view of report objects (tree points become documents,
    infinities become strings)."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: _jsonify(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, TreePoint):
        if obj.vertex is not None:
            return {"vertex": int(obj.vertex)}
        return {"edge": int(obj.edge), "offset": float(obj.offset)}
    if isinstance(obj, dict):
        return {str(k): _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, float):
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return obj
    if isinstance(obj, (str, int, bool)) or obj is None:
        return obj
    return str(obj)


def _emit(doc) -> None:
    print(json.dumps(_jsonify(doc), sort_keys=True, indent=2))


def _load(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InstanceError(f"{path}: invalid JSON: {exc}") from exc
    return parse_instance(doc)


def _default_seed() -> int:
    return int(os.environ.get("OFLP_SEED", "0"))


def _lambda_grid(text: str):
    try:
        grid = [float(t) for t in text.split(",") if t.strip() != ""]
    except ValueError as exc:
        raise InstanceError(f"bad lambda grid {text!r}: {exc}") from exc
    if not grid:
        raise InstanceError("lambda grid is empty")
    return grid


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="oflp", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="evaluate one instance")
    run.add_argument("instance")

    opt = sub.add_parser("opt", help="exact optimum of one instance")
    opt.add_argument("instance")

    sp = sub.add_parser("check-sp", help="unilateral misreport search")
    sp.add_argument("instance")
    sp.add_argument("--grid", type=int, default=101)

    gsp = sub.add_parser("check-gsp", help="coalition misreport search")
    gsp.add_argument("instance")
    gsp.add_argument("--coalition-size", type=int, default=2)
    gsp.add_argument("--gamma", type=float, default=1.0)
    gsp.add_argument("--grid", type=int, default=101)
    gsp.add_argument("--seed", type=int, default=None)
    gsp.add_argument("--budget", type=int, default=100_000)

    sw = sub.add_parser("sweep", help="lambda tradeoff curve as CSV")
    sw.add_argument("--space", choices=_KINDS, required=True)
    sw.add_argument("--lambda-grid", default="0,0.2,0.4,0.6,0.8")
    sw.add_argument("--budget", type=int, default=1000)
    sw.add_argument("--seed", type=int, default=None)

    lb = sub.add_parser("lb-verify", help="threshold-mechanism lower bound")
    lb.add_argument("--n", type=int, required=True)
    lb.add_argument("--c", type=float, required=True)
    lb.add_argument("--epsilon", type=float, required=True)

    fz = sub.add_parser("fuzz", help="random-instance bound fuzzing")
    fz.add_argument("--space", choices=_KINDS, required=True)
    fz.add_argument("--seed", type=int, default=None)
    fz.add_argument("--count", type=int, default=1000)
    fz.add_argument("--lam", default="0,0.2,0.4,0.6,0.8",
                    help="comma-separated lambda grid")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except (InstanceError, SpaceError, ContractError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _dispatch(args) -> int:
    if args.command == "run":
        space, profile, pred, lam = _load(args.instance)
        _emit(evaluate_instance(space, profile, pred, lam))
        return 0

    if args.command == "opt":
        space, profile, _, _ = _load(args.instance)
        mode = "dual" if profile.types is not None else "obnoxious"
        y_star, opt = optimal_location(space, profile, mode)
        _emit({"y_star": y_star, "opt": opt})
        return 0

    if args.command == "check-sp":
        space, profile, pred, lam = _load(args.instance)
        rep = check_unilateral(
            space, profile, pred, lam,
            resolution=args.grid,
            include_type_flips=profile.types is not None,
        )
        _emit(rep)
        return VIOLATION if rep.violated else 0

    if args.command == "check-gsp":
        space, profile, pred, lam = _load(args.instance)
        rep = check_coalition(
            space, profile, pred, lam,
            coalition_size=args.coalition_size,
            resolution=args.grid,
            gamma=args.gamma,
            include_type_flips=profile.types is not None,
            seed=args.seed if args.seed is not None else _default_seed(),
            budget=args.budget,
        )
        _emit(rep)
        return VIOLATION if rep.violated else 0

    if args.command == "sweep":
        grid = _lambda_grid(args.lambda_grid)
        seed = args.seed if args.seed is not None else _default_seed()
        curve = tradeoff_sweep(args.space, grid, budget=args.budget, seed=seed)
        print("lambda,eta_mode,empirical_ratio,bound,instance_digest")
        for row in curve.rows:
            print(f"{row.lam!r},zero,{row.empirical_consistency!r},"
                  f"{row.bound_consistency!r},{row.digest_consistency}")
            print(f"{row.lam!r},free,{row.empirical_robustness!r},"
                  f"{row.bound_robustness!r},{row.digest_robustness}")
        return 0

    if args.command == "lb-verify":
        _emit(lb_verify(args.n, args.c, args.epsilon))
        return 0

    if args.command == "fuzz":
        grid = _lambda_grid(args.lam)
        seed = args.seed if args.seed is not None else _default_seed()
        stats = bound_fuzz(args.space, grid, args.count, seed)
        ok = True
        rows = []
        for lam in grid:
            st = stats[lam]
            row = _jsonify(st)
            row["bound_robustness"] = _jsonify(robustness_bound(lam))
            row["bound_consistency"] = consistency_bound(lam)
            row["within_bounds"] = (
                st.max_ratio <= robustness_bound(lam) + 1e-9
                and st.max_ratio_eta0 <= consistency_bound(lam) + 1e-9
            )
            ok = ok and row["within_bounds"]
            rows.append(row)
        _emit({"space": args.space, "count": args.count, "seed": seed, "rows": rows})
        return 0 if ok else 1

    raise AssertionError(f"unhandled command {args.command}")


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
