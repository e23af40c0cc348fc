"""Command-line front end: check / reduce / init / run.

Exit status: 0 completed, 2 validation or scenario error, 3 numerical
divergence (a partial trajectory is still written).
"""

import argparse
import concurrent.futures
import sys
from pathlib import Path

import numpy as np

from .errors import DivergenceError, ScenarioError, SingularMatrixError
from .initstate import initialize_classical, initialize_fourth
from .netred import (
    build_t2,
    constant_internal_admittance,
    expand_real_blocks,
    format_complex_matrix,
    format_real_matrix,
    internal_bus_admittance,
    invert_y_r,
    build_t1,
)
from .scenario_io import (
    parse_scenario,
    serialize_scenario,
    write_trajectory,
)
from .sim import (
    MODEL_CLASSICAL,
    Scenario,
    scenario_digest,
    simulate,
    stability_summary,
)

_PRINT_PRECISION = 4


def _initial_angles(scenario: Scenario) -> np.ndarray:
    if scenario.initial_state is not None:
        return np.asarray(scenario.initial_state, dtype=float)[: scenario.m]
    if scenario.model == MODEL_CLASSICAL:
        state0, _ = initialize_classical(scenario.operating_points, scenario.generators)
    else:
        state0, _ = initialize_fourth(scenario.operating_points, scenario.generators)
    return state0[: scenario.m]


def cmd_check(paths) -> int:
    status = 0
    for path in paths:
        try:
            parse_scenario(path)
        except ScenarioError as exc:
            print(f"invalid: {exc}", file=sys.stderr)
            status = 2
            continue
        print(f"ok: {path}")
    return status


def cmd_reduce(path) -> int:
    scenario = parse_scenario(path)
    impedances = [g.impedance for g in scenario.generators]
    t2 = build_t2(impedances)
    xdp = np.array([z.x_d_prime for z in impedances])
    xqp = np.array([z.x_q_prime for z in impedances])
    constant_ok = bool(np.all(xdp == xqp))
    deltas0 = _initial_angles(scenario)

    print("source-impedance matrix T_2")
    print(format_real_matrix(t2, _PRINT_PRECISION))
    seen = set()
    for stage in scenario.stages:
        if stage.label in seen:
            continue
        seen.add(stage.label)
        if stage.y is not None:
            print(f"\nstage {stage.label}: internal-bus matrix Y (supplied)")
            print(format_real_matrix(stage.y, _PRINT_PRECISION))
            continue
        y_t = stage.y_t if stage.y_t is not None else stage.network.terminal_matrix()
        print(f"\nstage {stage.label}: terminal-bus matrix Y_t")
        print(format_complex_matrix(y_t, _PRINT_PRECISION))
        y_r = expand_real_blocks(y_t)
        print(f"\nstage {stage.label}: real-block expansion Y_r")
        print(format_real_matrix(y_r, _PRINT_PRECISION))
        y_r_inv = invert_y_r(y_r)
        if constant_ok:
            y = constant_internal_admittance(None, t2, y_r_inv=y_r_inv)
            note = "constant"
        else:
            y = internal_bus_admittance(None, build_t1(deltas0), t2, y_r_inv=y_r_inv)
            note = "at initial rotor angles"
        print(f"\nstage {stage.label}: internal-bus matrix Y ({note})")
        print(format_real_matrix(y, _PRINT_PRECISION))
    return 0


def cmd_init(path) -> int:
    scenario = parse_scenario(path)
    if scenario.operating_points is None:
        raise ScenarioError(
            f"{path}: scenario has an explicit initial state; nothing to initialize"
        )
    if scenario.model == MODEL_CLASSICAL:
        state0, gens = initialize_classical(scenario.operating_points, scenario.generators)
        header = f"{'generator':<12}{'delta0':>12}{'e_q_prime':>12}{'P_m':>12}"
        print(header)
        for i, g in enumerate(gens):
            name = g.name or f"{i + 1}"
            print(f"{name:<12}{state0[i]:>12.6f}{g.e_q_prime:>12.6f}{g.p_m:>12.6f}")
    else:
        state0, gens = initialize_fourth(scenario.operating_points, scenario.generators)
        m = scenario.m
        header = (
            f"{'generator':<12}{'delta0':>12}{'e_q_prime':>12}{'e_d_prime':>12}"
            f"{'E_fq':>12}{'P_m':>12}"
        )
        print(header)
        for i, g in enumerate(gens):
            name = g.name or f"{i + 1}"
            print(
                f"{name:<12}{state0[i]:>12.6f}{state0[2 * m + i]:>12.6f}"
                f"{state0[3 * m + i]:>12.6f}{g.e_fq:>12.6f}{g.p_m:>12.6f}"
            )
    return 0


def _output_path(path, out, many: bool) -> Path:
    stem_default = Path(path).stem + "_traj.csv"
    if out is not None:
        target = Path(out)
        if many:
            target.mkdir(parents=True, exist_ok=True)
            return target / stem_default
        return target
    scenario_out = None
    try:
        scenario_out = parse_scenario(path).output_path
    except ScenarioError:
        pass
    return Path(scenario_out) if scenario_out else Path(stem_default)


def _run_one(args) -> tuple:
    path, out, many = args
    lines, err_lines, status = [], [], 0
    try:
        scenario = parse_scenario(path)
        digest = scenario_digest(serialize_scenario(scenario))
        target = _output_path(path, out, many)
        try:
            trajectory = simulate(scenario)
            trajectory.scenario_hash = digest
            write_trajectory(trajectory, target, scenario.output_precision)
            lines.append(f"{path}: wrote {target} ({trajectory.t.size} samples)")
            lines.append(stability_summary(trajectory).format())
        except DivergenceError as exc:
            status = 3
            if exc.trajectory is not None and exc.trajectory.t.size:
                exc.trajectory.scenario_hash = digest
                write_trajectory(exc.trajectory, target, scenario.output_precision)
                err_lines.append(
                    f"{path}: {exc}; partial trajectory flushed to {target}"
                )
            else:
                err_lines.append(f"{path}: {exc}")
    except (ScenarioError, SingularMatrixError, ValueError) as exc:
        status = 2
        err_lines.append(f"{path}: {exc}")
    return path, status, "\n".join(lines), "\n".join(err_lines)


def cmd_run(paths, out, jobs) -> int:
    many = len(paths) > 1
    tasks = [(p, out, many) for p in paths]
    if jobs > 1 and many:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_one, tasks))
    else:
        results = [_run_one(t) for t in tasks]
    status = 0
    for _, st, text, err in results:
        if text:
            print(text)
        if err:
            print(err, file=sys.stderr)
        status = max(status, st)
    return status


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swingsim",
        description="Multi-machine transient stability simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_check = sub.add_parser("check", help="validate scenario files")
    p_check.add_argument("files", nargs="+")

    p_reduce = sub.add_parser(
        "reduce", help="print the network reduction matrices of a scenario"
    )
    p_reduce.add_argument("file")

    p_init = sub.add_parser(
        "init", help="print steady-state initialization from an operating point"
    )
    p_init.add_argument("file")

    p_run = sub.add_parser("run", help="simulate scenarios and write trajectories")
    p_run.add_argument("files", nargs="+")
    p_run.add_argument("--out", default=None, help="output file (or directory for multiple inputs)")
    p_run.add_argument("--jobs", type=int, default=1, help="parallel scenario runs")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "check":
            return cmd_check(args.files)
        if args.command == "reduce":
            return cmd_reduce(args.file)
        if args.command == "init":
            return cmd_init(args.file)
        if args.command == "run":
            return cmd_run(args.files, args.out, args.jobs)
    except (ScenarioError, SingularMatrixError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    raise AssertionError(f"unhandled command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
