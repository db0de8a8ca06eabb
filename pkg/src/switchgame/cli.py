"""Batch front door: validate / solve / game / oracle, one JSON config per run.

Exit codes: 0 success, 1 domain failure (failed assumption, non-convergence,
unmet precondition), 2 usage or parse error.  All persisted outputs are
byte-reproducible for a fixed config and seed.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .config import RunConfig, load_config, worker_count
from .errors import ConfigError, ConvergenceError, PreconditionError, SwitchgameError
from .grid import build_grid
from .model import run_all_checks, validate_consistency, validate_costs
from .simulate import simulate_paths
from .solver import solve_maxmin, solve_minmax, solve_single_obstacle, sup_gap
from . import game as game_mod


def _write_json(path, payload: dict):
    with open(path, "w") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")


def _ensure_output(config: RunConfig) -> str:
    os.makedirs(config.output, exist_ok=True)
    return config.output


def cmd_validate(config: RunConfig) -> int:
    out = _ensure_output(config)
    report = run_all_checks(config.spec, config.samples(), config.validation.loop_length_bound)
    _write_json(os.path.join(out, "validate_report.json"), report.to_dict())
    return 0 if report.all_passed() else 1


def _core_checks_pass(config: RunConfig) -> tuple[bool, dict]:
    report = validate_costs(config.spec, config.samples(), config.validation.loop_length_bound)
    frag = validate_consistency(config.spec, sorted({x for _, x in config.samples()}))
    for check in frag.checks.values():
        report.add(check)
    return report.all_passed(), report.to_dict()


def cmd_solve(config: RunConfig, system: str) -> int:
    out = _ensure_output(config)
    ok, gate = _core_checks_pass(config)
    if not ok:
        _write_json(os.path.join(out, "solve_gate_report.json"), gate)
        print("cost/consistency checks failed; see solve_gate_report.json", file=sys.stderr)
        return 1
    grid = build_grid(config.spec, config.nt, config.nx)

    wanted = ["minmax", "maxmin"] if system == "both" else [system]
    results = {}
    try:
        if len(wanted) == 2 and worker_count() > 1:
            with ThreadPoolExecutor(max_workers=2) as pool:
                futs = {
                    name: pool.submit(
                        solve_minmax if name == "minmax" else solve_maxmin,
                        config.spec, grid, config.schedule,
                    )
                    for name in wanted
                }
                for name, fut in futs.items():
                    results[name] = fut.result()
        else:
            for name in wanted:
                solver = solve_minmax if name == "minmax" else solve_maxmin
                results[name] = solver(config.spec, grid, config.schedule)
    except ConvergenceError as exc:
        _write_json(os.path.join(out, "solve_error.json"),
                    {"error": str(exc), "residual": exc.residual})
        print(f"solver did not converge: {exc}", file=sys.stderr)
        return 1

    for name, (fld, report) in results.items():
        fld.to_csv(os.path.join(out, f"value_{name}.csv"))
        _write_json(os.path.join(out, f"value_{name}_meta.json"), fld.meta_dict())
        _write_json(os.path.join(out, f"solve_report_{name}.json"), report.to_dict())

    if system == "both":
        fa, _ = results["minmax"]
        fb, _ = results["maxmin"]
        gap = sup_gap(fa, fb, region=0.5)
        mask = grid.inner_mask(0.5)
        with open(os.path.join(out, "gap_minmax_maxmin.csv"), "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["t", "x", "gap"])
            diff = np.max(np.abs(fa.values - fb.values), axis=0)
            for k in range(grid.nt):
                for idx in np.flatnonzero(mask):
                    writer.writerow([
                        repr(float(grid.times[k])), repr(float(grid.xs[idx])),
                        repr(float(diff[k, idx])),
                    ])
        for name in wanted:
            report = results[name][1]
            report.final_gap = gap
            _write_json(os.path.join(out, f"solve_report_{name}.json"), report.to_dict())
    return 0


def cmd_game(config: RunConfig) -> int:
    out = _ensure_output(config)
    if config.sim is None or config.start_modes is None:
        raise ConfigError("simulation", "the game command needs a simulation section")
    grid = build_grid(config.spec, config.nt, config.nx)
    try:
        field1 = solve_single_obstacle(config.spec, grid, 1)
        field2 = solve_single_obstacle(config.spec, grid, 2)
    except PreconditionError as exc:
        _write_json(os.path.join(out, "game_gate_report.json"),
                    {"error": str(exc), "witness": exc.witness})
        print(f"separation check failed: {exc}", file=sys.stderr)
        return 1

    bundle = simulate_paths(config.spec, config.sim)
    i0, j0 = config.start_modes
    challengers1 = game_mod.default_challengers(
        config.spec, 1, i0, config.sim.seed + 1, config.sim.n_steps)
    challengers2 = game_mod.default_challengers(
        config.spec, 2, j0, config.sim.seed + 2, config.sim.n_steps)
    report = game_mod.verify_saddle_from_fields(
        config.spec, bundle, field1, field2, challengers1, challengers2,
        start=(config.sim.t0, config.sim.x0, i0, j0),
    )
    _write_json(os.path.join(out, "game_report.json"), report.to_dict())

    payoff = report.saddle_payoff
    with open(os.path.join(out, "payoffs.csv"), "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["path", "payoff", "switches1", "switches2", "costA", "costB"])
        for p in range(payoff.n_paths):
            writer.writerow([
                p, repr(float(payoff.per_path[p])),
                int(payoff.switches1[p]), int(payoff.switches2[p]),
                repr(float(payoff.cost1_per_path[p])), repr(float(payoff.cost2_per_path[p])),
            ])
    return 0 if report.all_passed() else 1


def cmd_oracle(config: RunConfig) -> int:
    out = _ensure_output(config)
    x0 = config.sim.x0 if config.sim is not None else 0.5 * sum(config.spec.domain)
    try:
        values = game_mod.deterministic_dp_oracle(config.spec, config.nt, x0)
    except PreconditionError as exc:
        _write_json(os.path.join(out, "oracle_report.json"), {"error": str(exc)})
        print(f"oracle precondition failed: {exc}", file=sys.stderr)
        return 1
    payload = {
        "x": x0,
        "nt": config.nt,
        "minmax": {f"{i},{j}": v for (i, j), v in values["minmax"].items()},
        "maxmin": {f"{i},{j}": v for (i, j), v in values["maxmin"].items()},
    }
    deltas = {}
    for name in ("minmax", "maxmin"):
        csv_path = os.path.join(out, f"value_{name}.csv")
        if os.path.exists(csv_path):
            solved = _read_solver_values(csv_path, x0)
            deltas[name] = {
                key: solved[key] - payload[name][key] for key in payload[name] if key in solved
            }
    if deltas:
        payload["solver_deltas"] = deltas
    _write_json(os.path.join(out, "oracle_report.json"), payload)
    return 0


def _read_solver_values(csv_path: str, x0: float) -> dict:
    """Value at the first time level, at the node nearest x0, per mode pair."""
    best: dict[str, tuple[float, float]] = {}
    with open(csv_path) as handle:
        for row in csv.DictReader(handle):
            if int(row["t_index"]) != 0:
                continue
            key = f"{row['i']},{row['j']}"
            dist = abs(float(row["x"]) - x0)
            if key not in best or dist < best[key][0]:
                best[key] = (dist, float(row["value"]))
    return {key: val for key, (_, val) in best.items()}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="switchgame",
        description="Solve and verify two-player switching games on a 1-D state.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_validate = sub.add_parser("validate", help="run the assumption checks")
    p_validate.add_argument("config")

    p_solve = sub.add_parser("solve", help="run the penalized backward solvers")
    p_solve.add_argument("config")
    p_solve.add_argument("--system", choices=["minmax", "maxmin", "both"], default="both")

    p_game = sub.add_parser("game", help="build saddle strategies and verify them")
    p_game.add_argument("config")

    p_oracle = sub.add_parser("oracle", help="frozen-state backward-induction values")
    p_oracle.add_argument("config")

    args = parser.parse_args(argv)
    try:
        config = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    try:
        if args.command == "validate":
            return cmd_validate(config)
        if args.command == "solve":
            return cmd_solve(config, args.system)
        if args.command == "game":
            return cmd_game(config)
        return cmd_oracle(config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except SwitchgameError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry():  # console script
    sys.exit(main())


if __name__ == "__main__":
    entry()
