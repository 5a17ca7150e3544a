"""Command-line front end: run, check, sweep, list and show scenarios.

Exit codes: 0 reached t_end, 1 input error, 2 collision guard, 3 step budget.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from .core import Formulation, NBodyState, validate_initial_conditions
from .dynamics import body_frame_residual, ncme_acc
from .integrate import Termination, Trajectory, propagate
from .invariants import bcos3_consistency_check, invariant_report, two_body_bcos_contradiction
from . import scenarios

EXIT_OK, EXIT_INPUT, EXIT_GUARD, EXIT_STEPS = 0, 1, 2, 3
EXIT_CODES = {
    Termination.REACHED_T_END: EXIT_OK,
    Termination.COLLISION_GUARD: EXIT_GUARD,
    Termination.MAX_STEPS: EXIT_STEPS,
}


def resolve(source: str):
    """Load a scenario from a file, or by bundled name when no such file exists."""
    path = Path(source)
    if path.is_file():
        return scenarios.load(path)
    if source in scenarios.BUNDLED:
        return scenarios.bundled(source)
    raise FileNotFoundError(f"{source}: no such file or bundled scenario")


def column_names(traj: Trajectory) -> list[str]:
    wide = traj.n >= 10

    def label(key):
        if isinstance(key, tuple):
            return f"{key[0]}_{key[1]}" if wide else f"{key[0]}{key[1]}"
        return str(key)

    cols = ["t"]
    for prefix in ("r", "v"):
        for key in traj.keys:
            cols += [f"{prefix}{label(key)}_{axis}" for axis in "xyz"]
    return cols


def write_trajectory_csv(traj: Trajectory, path) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(column_names(traj))
        S = len(traj)
        flat = np.hstack(
            [traj.times[:, None], traj.positions.reshape(S, -1), traj.velocities.reshape(S, -1)]
        )
        for row in flat:
            out.writerow([repr(float(x)) for x in row])


def bcos_diagnostics(state: NBodyState) -> dict:
    r = state.positions - state.positions[0]
    m = state.masses
    if state.n == 3:
        return {"bcos3": bcos3_consistency_check(m[1], m[2], r[1], r[2]).as_dict()}
    if state.n == 2:
        return {"two_body_contradiction": two_body_bcos_contradiction(m[1], r[1], state.G)}
    return {}


def summarize(sc, traj: Trajectory) -> dict:
    state0 = sc.initial_state()
    check = validate_initial_conditions(state0)
    summary = {
        "scenario": sc.name,
        "formulation": traj.formulation.value,
        "bodies": traj.n,
        "termination": traj.termination.value,
        "exit_code": EXIT_CODES[traj.termination],
        "t_final": float(traj.times[-1]),
        "samples": len(traj),
        "accepted_steps": traj.accepted_steps,
        "rejected_steps": traj.rejected_steps,
        "collision_guard": traj.guard,
        "guard_pair": list(traj.guard_pair) if traj.guard_pair else None,
        "validation": {
            "ok": check.ok,
            "violating_pairs": [list(p) for p in check.violating_pairs],
        },
    }
    summary.update(bcos_diagnostics(state0))

    if traj.n >= 2:
        reports = traj.reports
        if reports is None:
            idx = sorted({0, len(traj) - 1})
            reports = [invariant_report(traj.state(i)) for i in idx]
        summary["invariants"] = {
            "samples_checked": len(reports),
            "max_identity_residual": max(r.identity_residual for r in reports),
            "identity_rhs_negative": all(r.negativity_ok for r in reports),
            "max_t_sum_residual": max(r.t_sum_residual for r in reports),
            "min_restless_pairs": min(len(r.restless_pairs) for r in reports),
            "min_accelerating_bodies": min(r.accelerating_bodies for r in reports),
            "bound_ok": all(r.bound_ok for r in reports),
            "final": reports[-1].as_dict(),
        }

    if traj.formulation is Formulation.NCME and traj.n >= 2:
        worst = 0.0
        for i in range(len(traj)):
            st = traj.state(i)
            scale = np.linalg.norm(ncme_acc(st.positions, st.masses, st.G), axis=1).max()
            worst = max(worst, float(body_frame_residual(st).max() / scale))
        summary["body_frame_max_residual"] = worst
    if traj.formulation is Formulation.RS2:
        summary["triangle_max_residual"] = max(
            traj.state(i).triangle_residual() for i in range(len(traj))
        )
    return summary


def execute(sc, outdir: Path, report_invariants: bool) -> tuple[int, dict]:
    check = validate_initial_conditions(sc.initial_state())
    if not check.ok:
        raise ValueError(f"invalid initial conditions: coincident pairs {list(check.violating_pairs)}")
    traj = propagate(sc, report_invariants=report_invariants)
    outdir.mkdir(parents=True, exist_ok=True)
    write_trajectory_csv(traj, outdir / f"{sc.name}.csv")
    summary = summarize(sc, traj)
    (outdir / f"{sc.name}.summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    return EXIT_CODES[traj.termination], summary


def cmd_run(args) -> int:
    try:
        sc = resolve(args.scenario)
        if args.formulation:
            sc = replace(sc, formulation=Formulation(args.formulation))
        code, summary = execute(sc, Path(args.output), args.report_invariants)
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    inv = summary.get("invariants", {})
    print(f"{sc.name}: {summary['termination']} at t={summary['t_final']:.6g}"
          f" ({summary['samples']} samples)")
    if inv:
        print(f"  max identity residual {inv['max_identity_residual']:.3e}")
    return code


def cmd_check(args) -> int:
    try:
        sc = resolve(args.scenario)
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    state = sc.initial_state()
    check = validate_initial_conditions(state)
    print(f"scenario: {sc.name} (N={state.n}, {sc.formulation.value})")
    if check.ok:
        print("validation: ok")
    else:
        pairs = ", ".join(f"({j},{k})" for j, k in check.violating_pairs)
        print(f"validation: FAILED, coincident bodies {pairs}")
    diag = bcos_diagnostics(state)
    if "bcos3" in diag:
        d = diag["bcos3"]
        print(f"bcos3: {d['verdict']}")
        print(f"  body-1 constraint residual {d['constraint_residual']:.6e}")
        print(f"  mass residual {d['mass_residual']:.3e}, geometry residual {d['geometry_residual']:.3e}")
    if "two_body_contradiction" in diag:
        print(f"two-body contradiction magnitude: {diag['two_body_contradiction']:.6e}")
    return EXIT_OK if check.ok else EXIT_INPUT


def cmd_sweep(args) -> int:
    outdir = Path(args.output)

    def one(source):
        try:
            sc = resolve(source)
            code, summary = execute(sc, outdir, args.report_invariants)
            return source, code, summary["termination"]
        except (OSError, ValueError, KeyError) as exc:
            return source, EXIT_INPUT, f"error: {exc}"

    with ThreadPoolExecutor(max_workers=args.workers) as pool:
        results = list(pool.map(one, args.scenarios))
    for source, code, what in results:
        print(f"{source}: {what} (exit {code})")
    return max(code for _, code, _ in results)


def cmd_list(args) -> int:
    for name in scenarios.BUNDLED:
        print(name)
    return EXIT_OK


def cmd_show(args) -> int:
    try:
        sys.stdout.write(scenarios.dumps(scenarios.bundled(args.name)))
    except KeyError as exc:
        print(f"error: {exc.args[0]}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="relnbody", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="integrate a scenario and write trajectory + summary")
    p.add_argument("scenario", help="scenario JSON file or bundled scenario name")
    p.add_argument("output", help="output directory")
    p.add_argument("--formulation", choices=[f.value for f in Formulation])
    p.add_argument("--report-invariants", action="store_true",
                   help="check invariants at every sample (O(N^3) each)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("check", help="validate a scenario without integrating")
    p.add_argument("scenario")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("sweep", help="run several scenarios in worker threads")
    p.add_argument("output")
    p.add_argument("scenarios", nargs="+")
    p.add_argument("--workers", type=int, default=4)
    p.add_argument("--report-invariants", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("list", help="list bundled scenarios")
    p.set_defaults(func=cmd_list)

    p = sub.add_parser("show", help="print a bundled scenario as JSON")
    p.add_argument("name")
    p.set_defaults(func=cmd_show)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
