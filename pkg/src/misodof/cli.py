"""Command-line front end.

Exit codes: 0 success, 1 verification or achievability failure, 2 usage or
malformed input, 3 degenerate geometry (infeasible constants, unbounded or
empty polyhedra).
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Optional, Sequence

from . import dof_model, fme, geometry
from .dof_model import CsitProfile, InvalidProfile, NotAchievable
from .poly_core import InequalitySystem, InfeasibleConstant, PolyError, VarId, canonicalize, dumps
from .report import run_verification

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_GEOMETRY = 0, 1, 2, 3

REGIONS = ("outer", "rs", "rs8", "rs9", "intermediate")


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- input helpers


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _profile(args) -> CsitProfile:
    if getattr(args, "profile", None):
        obj = json.loads(_read_text(args.profile))
        if not isinstance(obj, dict) or not isinstance(obj.get("alpha"), list):
            raise UsageError('profile JSON must look like {"alpha": ["9/10", "3/10"]}')
        return CsitProfile.from_values(str(a) for a in obj["alpha"])
    if not args.alpha:
        raise UsageError("--alpha (or --profile) is required")
    return CsitProfile.parse(args.alpha)


def _system(args) -> InequalitySystem:
    if not args.input:
        raise UsageError("--input is required")
    text = _read_text(args.input)
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"input is not valid JSON: {exc}") from exc
    if isinstance(obj, dict) and "system" in obj and "vars" not in obj:
        obj = obj["system"]  # accept the output of `project --trace`
    if not isinstance(obj, dict):
        raise UsageError("input must be a JSON object with 'vars' and 'constraints'")
    try:
        return InequalitySystem.from_json(obj)
    except (KeyError, TypeError, AttributeError) as exc:
        raise UsageError(f"malformed system: {exc!r}") from exc


def _var_list(text: Optional[str]) -> list[VarId]:
    if not text:
        return []
    return [VarId.parse(p.strip()) for p in text.split(",") if p.strip()]


def _emit(args, payload) -> None:
    text = dumps(payload)
    sys.stdout.write(text)
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            fh.write(text)


def _build_region(kind: str, profile: CsitProfile, k: Optional[int]) -> InequalitySystem:
    if kind == "outer":
        return dof_model.outer_bound(profile)
    if kind == "rs":
        return dof_model.rs_region_single_power(profile)
    if kind == "rs8":
        return dof_model.rs_after_private_elim(profile)
    if kind == "rs9":
        return dof_model.rs_after_power_elim(profile)
    if kind == "intermediate":
        if k is None:
            raise UsageError("region intermediate needs --k")
        return dof_model.expected_intermediate(profile, k)
    raise UsageError(f"unknown region {kind!r}")


# ---------------------------------------------------------------- commands


def _verify_case(job: tuple) -> dict:
    index, alphas, trace = job
    rep = run_verification(CsitProfile.from_values(alphas), trace=trace)
    return {"index": index, "ok": rep.ok, "report": rep.to_json(), "summary": rep.summary_lines()}


def cmd_verify(args) -> int:
    if args.batch is not None:
        return _verify_batch(args)
    rep = run_verification(_profile(args), trace=args.trace)
    sys.stdout.write("\n".join(rep.summary_lines()) + "\n")
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            fh.write(dumps(rep.to_json()))
    return EXIT_OK if rep.ok else EXIT_FAIL


def _verify_batch(args) -> int:
    if args.batch < 1:
        raise UsageError("--batch must be positive")
    if args.k is None or args.k < 1:
        raise UsageError("verify --batch needs --k K >= 1 (number of users)")
    rng = random.Random(args.seed)
    jobs = []
    for index in range(args.batch):
        profile = dof_model.random_profile(rng, args.k)
        jobs.append((index, tuple(str(a) for a in profile.original), args.trace))
    workers = args.jobs or os.cpu_count() or 1
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_verify_case, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        results = [_verify_case(j) for j in jobs]
    results.sort(key=lambda r: r["index"])
    failed = [r["index"] for r in results if not r["ok"]]
    for r in results:
        alpha = ",".join(r["report"]["profile"]["alpha"])
        sys.stdout.write(f"case {r['index']}: alpha=({alpha}) {'PASS' if r['ok'] else 'FAIL'}\n")
    sys.stdout.write(f"{len(results) - len(failed)}/{len(results)} cases passed (K={args.k}, seed={args.seed})\n")
    if args.json:
        out = {"k": args.k, "seed": args.seed, "cases": [r["report"] for r in results], "failed": failed}
        with open(args.json, "w", encoding="utf-8") as fh:
            fh.write(dumps(out))
    return EXIT_FAIL if failed else EXIT_OK


def cmd_region(args) -> int:
    profile = _profile(args)
    sys_ = _build_region(args.which, profile, args.k)
    _emit(args, profile.relabel(sys_).to_json())
    return EXIT_OK


def cmd_project(args) -> int:
    sys_ = _system(args)
    elim = _var_list(args.eliminate)
    result, trace = fme.project(sys_, elim, args.prune)
    result = canonicalize(result)
    if args.trace:
        _emit(args, {"system": result.to_json(), "trace": trace.to_json()})
    else:
        _emit(args, result.to_json())
    return EXIT_OK


def cmd_synthesize(args) -> int:
    profile = _profile(args)
    if not args.dof:
        raise UsageError("--dof is required")
    dof = [p.strip() for p in args.dof.split(",")]
    if len(dof) != profile.K:
        raise UsageError(f"--dof has {len(dof)} entries but the profile has {profile.K} users")
    res = dof_model.synthesize_strategy(profile, dof)
    _emit(args, res.to_json())
    return EXIT_FAIL if isinstance(res, NotAchievable) else EXIT_OK


def cmd_vertices(args) -> int:
    if args.input:
        sys_ = _system(args)
    else:
        profile = _profile(args)
        sys_ = profile.relabel(_build_region(args.region, profile, args.k))
    _emit(args, geometry.enumerate_vertices(sys_).to_json())
    return EXIT_OK


def cmd_sumdof(args) -> int:
    profile = _profile(args)
    formula = dof_model.sum_dof(profile)
    objective = {VarId("d", i): 1 for i in range(1, profile.K + 1)}
    lp, point = geometry.maximize(dof_model.outer_bound(profile), objective)
    argmax = profile.to_original([point[VarId("d", i)] for i in range(1, profile.K + 1)])
    payload = {
        "alpha": [str(a) for a in profile.original],
        "formula": str(formula),
        "lp": str(lp),
        "argmax": [str(x) for x in argmax],
        "agree": formula == lp,
    }
    _emit(args, payload)
    return EXIT_OK if formula == lp else EXIT_FAIL


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", metavar="PATH", help="also write the JSON output/report to PATH")
    common.add_argument("--trace", action="store_true", help="embed the elimination trace")
    common.add_argument("--seed", type=int, default=0, help="seed for random profiles (default 0)")
    common.add_argument("--batch", type=int, metavar="N", help="verify N random profiles")
    common.add_argument("--k", type=int, metavar="K",
                        help="users per random profile (verify --batch) or step index (region intermediate)")
    common.add_argument("--alpha", metavar="A1,A2,...", help="CSIT levels as exact rationals, e.g. 9/10,3/10")
    common.add_argument("--profile", metavar="PATH", help='profile JSON {"alpha": [...]}; "-" reads stdin')

    parser = argparse.ArgumentParser(prog="misodof", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", parents=[common], help="run the full certification pipeline")
    p.add_argument("--jobs", type=int, help="worker processes for --batch (default: CPU count)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("region", parents=[common], help="print a region as JSON")
    p.add_argument("which", choices=REGIONS)
    p.set_defaults(func=cmd_region)

    p = sub.add_parser("project", parents=[common], help="eliminate variables from a system")
    p.add_argument("--input", metavar="PATH", help='system JSON; "-" reads stdin')
    p.add_argument("--eliminate", metavar="V1,V2,...", default="", help="variables to eliminate, in order")
    p.add_argument("--prune", choices=fme.PRUNE_MODES, default="pairwise")
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("synthesize", parents=[common], help="find a single-power strategy for a DoF tuple")
    p.add_argument("--dof", metavar="D1,D2,...")
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("vertices", parents=[common], help="enumerate the vertices of a bounded system")
    p.add_argument("--input", metavar="PATH", help='system JSON; "-" reads stdin')
    p.add_argument("--region", choices=REGIONS, default="outer")
    p.set_defaults(func=cmd_vertices)

    p = sub.add_parser("sumdof", parents=[common], help="sum-DoF by formula and by LP")
    p.set_defaults(func=cmd_sumdof)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (InfeasibleConstant, geometry.Unbounded, geometry.InfeasibleSystem) as exc:
        print(f"misodof: {exc}", file=sys.stderr)
        return EXIT_GEOMETRY
    except (UsageError, InvalidProfile, PolyError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"misodof: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
