"""Scenario files and trajectory files.

Scenarios are YAML documents with five sections::

    system:                      # model kind, machines, network stage sources
      model: classical           # or fourth_order
      generators:                # one record per machine, keyed by parameter name
        - {name: G1, H: 23.64, D: 23.64, R_a: 0.0, X_d_prime: 0.0608,
           P_m: 0.7164, e_q_prime: 1.0566}
      reduced:                   # matrix-valued stage sources, keyed by label
        pre:  {y_t: [["1.1051-4.6957i", ...], ...]}   # terminal-bus, complex
        on:   {y:   [[0.6568, 3.8160, ...], ...]}     # internal-bus, real blocks
      network:                   # raw-network stage sources, keyed by label
        post: {n_nodes: 9, generator_nodes: [1, 2, 3],
               branches: [[1, 4, "0.0-8.4459i"], ...],
               shunts:   [[5, "1.2610-0.5044i"], ...]}
      initial_stage: pre         # optional; required only when every label
                                 # also appears in events
    initial:                     # exactly one of state / operating_point
      state: {delta: [...], omega: [...]}      # fourth_order adds
                                               # e_q_prime / e_d_prime lists
      operating_point: {voltage: ["1.04+0.0i", ...], current: [...]}
      angle_unit: radians        # optional; degrees converts state delta
    events:                      # optional staged switching, strictly
      - {stage: on, time: 0.0}   # increasing times; time 0 makes the base
      - {stage: post, time: 0.0833333333}      # stage zero-length
    run:
      t_end: 3.0
      step: 0.0016666666666666668
      frequency: 60.0            # or omega_s: <rad/s>; default 60 Hz
      stride: 1                  # optional output decimation
    output:                      # optional
      path: traj.csv
      precision: 9

Unknown fields anywhere are rejected, not ignored.  Classical generator
records take H, D, R_a, X_d_prime plus P_m / e_q_prime; fourth_order records
take H, D, R_a, X_d, X_q, X_d_prime, X_q_prime, T_d0_prime, T_q0_prime plus
P_m / E_fq.  The constant inputs (P_m, e_q_prime, E_fq) are forbidden when an
operating point is supplied, since initialization computes them.

Complex values are written as ``a+bi`` tokens ("j" is accepted too).
Trajectory files are comma-delimited UTF-8 with ``#`` metadata lines before
the header; columns are ``t`` then per generator ``delta_i, omega_i
[, eqp_i, edp_i], pe_i``.
"""

import math
from pathlib import Path

import numpy as np
import yaml

from .errors import ScenarioError
from .genmodel import ClassicalGenParams, FourthOrderGenParams
from .initstate import OperatingPoint
from .sim import (
    MODEL_CLASSICAL,
    MODEL_FOURTH_ORDER,
    NetworkSpec,
    NetworkStage,
    Scenario,
    Trajectory,
)

_CLASSICAL_REQUIRED = ("H", "D", "R_a", "X_d_prime")
_CLASSICAL_CONSTANTS = ("P_m", "e_q_prime")
_FOURTH_REQUIRED = (
    "H",
    "D",
    "R_a",
    "X_d",
    "X_q",
    "X_d_prime",
    "X_q_prime",
    "T_d0_prime",
    "T_q0_prime",
)
_FOURTH_CONSTANTS = ("P_m", "E_fq")


def _check_keys(mapping, allowed, required, ctx):
    if not isinstance(mapping, dict):
        raise ScenarioError(f"{ctx}: expected a mapping, got {type(mapping).__name__}")
    unknown = sorted(set(mapping) - set(allowed))
    if unknown:
        raise ScenarioError(f"{ctx}: unknown field(s) {unknown}")
    missing = sorted(set(required) - set(mapping))
    if missing:
        raise ScenarioError(f"{ctx}: missing required field(s) {missing}")


def _as_float(value, ctx) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"{ctx}: expected a number, got {value!r}")
    out = float(value)
    if not math.isfinite(out):
        raise ScenarioError(f"{ctx}: value must be finite, got {value!r}")
    return out


def _as_int(value, ctx) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScenarioError(f"{ctx}: expected an integer, got {value!r}")
    return value


def parse_complex(value, ctx="value") -> complex:
    """Parse an ``a+bi`` token (or a plain number) into a complex value."""
    if isinstance(value, bool):
        raise ScenarioError(f"{ctx}: expected a number or 'a+bi' token, got {value!r}")
    if isinstance(value, (int, float)):
        return complex(float(value), 0.0)
    if isinstance(value, str):
        text = value.replace(" ", "").replace("i", "j")
        try:
            out = complex(text)
        except ValueError:
            raise ScenarioError(f"{ctx}: cannot parse complex token {value!r}") from None
        if not (math.isfinite(out.real) and math.isfinite(out.imag)):
            raise ScenarioError(f"{ctx}: value must be finite, got {value!r}")
        return out
    raise ScenarioError(f"{ctx}: expected a number or 'a+bi' token, got {value!r}")


def format_complex(z: complex) -> str:
    sign = "+" if z.imag >= 0 else "-"
    return f"{float(z.real)!r}{sign}{abs(float(z.imag))!r}i"


def _float_list(values, n, ctx) -> list:
    if not isinstance(values, list):
        raise ScenarioError(f"{ctx}: expected a list of {n} numbers")
    if len(values) != n:
        raise ScenarioError(f"{ctx}: expected {n} entries, got {len(values)}")
    return [_as_float(v, f"{ctx}[{k}]") for k, v in enumerate(values)]


def _parse_generators(items, model, constants_forbidden):
    if not isinstance(items, list) or not items:
        raise ScenarioError("system.generators: expected a non-empty list")
    required = _CLASSICAL_REQUIRED if model == MODEL_CLASSICAL else _FOURTH_REQUIRED
    constants = _CLASSICAL_CONSTANTS if model == MODEL_CLASSICAL else _FOURTH_CONSTANTS
    allowed = ("name",) + required + constants
    gens = []
    for i, rec in enumerate(items):
        ctx = f"system.generators[{i}]"
        _check_keys(rec, allowed, required, ctx)
        name = rec.get("name", "")
        if name and not isinstance(name, str):
            raise ScenarioError(f"{ctx}.name: expected a string")
        label = f"{ctx}{f' ({name})' if name else ''}"
        present = [c for c in constants if c in rec]
        if constants_forbidden and present:
            raise ScenarioError(
                f"{label}: {present} conflict with operating-point initialization "
                "(they are computed); remove them"
            )
        if not constants_forbidden:
            missing = [c for c in constants if c not in rec]
            if missing:
                raise ScenarioError(
                    f"{label}: {missing} required when an explicit initial state "
                    "is given"
                )
        val = {k: _as_float(v, f"{label}.{k}") for k, v in rec.items() if k != "name"}
        try:
            if model == MODEL_CLASSICAL:
                gens.append(
                    ClassicalGenParams(
                        h=val["H"],
                        d=val["D"],
                        r_a=val["R_a"],
                        x_d_prime=val["X_d_prime"],
                        p_m=val.get("P_m"),
                        e_q_prime=val.get("e_q_prime"),
                        name=name,
                    )
                )
            else:
                gens.append(
                    FourthOrderGenParams(
                        h=val["H"],
                        d=val["D"],
                        r_a=val["R_a"],
                        x_d=val["X_d"],
                        x_q=val["X_q"],
                        x_d_prime=val["X_d_prime"],
                        x_q_prime=val["X_q_prime"],
                        t_d0_prime=val["T_d0_prime"],
                        t_q0_prime=val["T_q0_prime"],
                        p_m=val.get("P_m"),
                        e_fq=val.get("E_fq"),
                        name=name,
                    )
                )
        except ValueError as exc:
            raise ScenarioError(f"{label}: {exc}") from None
    return gens


def _parse_matrix_real(rows, ctx) -> np.ndarray:
    if not isinstance(rows, list) or not rows:
        raise ScenarioError(f"{ctx}: expected a non-empty list of rows")
    n = len(rows)
    out = np.zeros((n, n))
    for r, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != n:
            raise ScenarioError(f"{ctx}: row {r} must have {n} entries")
        for c, v in enumerate(row):
            out[r, c] = _as_float(v, f"{ctx}[{r}][{c}]")
    return out


def _parse_matrix_complex(rows, ctx) -> np.ndarray:
    if not isinstance(rows, list) or not rows:
        raise ScenarioError(f"{ctx}: expected a non-empty list of rows")
    n = len(rows)
    out = np.zeros((n, n), dtype=complex)
    for r, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != n:
            raise ScenarioError(f"{ctx}: row {r} must have {n} entries")
        for c, v in enumerate(row):
            out[r, c] = parse_complex(v, f"{ctx}[{r}][{c}]")
    return out


def _parse_network_spec(spec, m, ctx) -> NetworkSpec:
    _check_keys(
        spec,
        ("n_nodes", "generator_nodes", "branches", "shunts"),
        ("n_nodes", "generator_nodes", "branches"),
        ctx,
    )
    n_nodes = _as_int(spec["n_nodes"], f"{ctx}.n_nodes")
    if n_nodes < 1:
        raise ScenarioError(f"{ctx}.n_nodes: must be >= 1, got {n_nodes}")
    nodes = spec["generator_nodes"]
    if not isinstance(nodes, list) or len(nodes) != m:
        raise ScenarioError(f"{ctx}.generator_nodes: expected a list of {m} node indices")
    nodes = [_as_int(v, f"{ctx}.generator_nodes[{k}]") for k, v in enumerate(nodes)]
    branches = []
    for k, item in enumerate(spec["branches"]):
        bctx = f"{ctx}.branches[{k}]"
        if not isinstance(item, list) or len(item) != 3:
            raise ScenarioError(f"{bctx}: expected [from, to, admittance]")
        branches.append(
            (
                _as_int(item[0], f"{bctx}[0]"),
                _as_int(item[1], f"{bctx}[1]"),
                parse_complex(item[2], f"{bctx}[2]"),
            )
        )
    shunts = []
    for k, item in enumerate(spec.get("shunts", [])):
        sctx = f"{ctx}.shunts[{k}]"
        if not isinstance(item, list) or len(item) != 2:
            raise ScenarioError(f"{sctx}: expected [node, admittance]")
        shunts.append(
            (_as_int(item[0], f"{sctx}[0]"), parse_complex(item[1], f"{sctx}[1]"))
        )
    return NetworkSpec(n_nodes=n_nodes, generator_nodes=nodes, branches=branches, shunts=shunts)


def _parse_stage_sources(system, m):
    sources = {}
    for label, spec in (system.get("reduced") or {}).items():
        ctx = f"system.reduced.{label}"
        if label in sources:
            raise ScenarioError(f"{ctx}: duplicate stage label")
        _check_keys(spec, ("y", "y_t"), (), ctx)
        if ("y" in spec) == ("y_t" in spec):
            raise ScenarioError(f"{ctx}: exactly one of y / y_t required")
        if "y" in spec:
            mat = _parse_matrix_real(spec["y"], f"{ctx}.y")
            if mat.shape != (2 * m, 2 * m):
                raise ScenarioError(
                    f"{ctx}.y: internal-bus matrix must be {2*m}x{2*m} for {m} "
                    f"generators, got {mat.shape[0]}x{mat.shape[1]}"
                )
            sources[label] = {"y": mat}
        else:
            mat = _parse_matrix_complex(spec["y_t"], f"{ctx}.y_t")
            if mat.shape != (m, m):
                raise ScenarioError(
                    f"{ctx}.y_t: terminal-bus matrix must be {m}x{m} for {m} "
                    f"generators, got {mat.shape[0]}x{mat.shape[1]}"
                )
            sources[label] = {"y_t": mat}
    for label, spec in (system.get("network") or {}).items():
        ctx = f"system.network.{label}"
        if label in sources:
            raise ScenarioError(f"{ctx}: stage label also defined under system.reduced")
        sources[label] = {"network": _parse_network_spec(spec, m, ctx)}
    if not sources:
        raise ScenarioError("system: no network stages defined (reduced/network)")
    return sources


def _parse_events(doc, sources):
    events = []
    for k, item in enumerate(doc.get("events") or []):
        ctx = f"events[{k}]"
        _check_keys(item, ("stage", "time"), ("stage", "time"), ctx)
        label = item["stage"]
        if label not in sources:
            raise ScenarioError(f"{ctx}.stage: undefined stage label '{label}'")
        time = _as_float(item["time"], f"{ctx}.time")
        if time < 0:
            raise ScenarioError(f"{ctx}.time: must be >= 0, got {time}")
        if events and time <= events[-1][1]:
            raise ScenarioError(f"{ctx}.time: event times must strictly increase")
        events.append((label, time))
    return events


def _base_label(system, sources, events):
    explicit = system.get("initial_stage")
    if explicit is not None:
        if explicit not in sources:
            raise ScenarioError(
                f"system.initial_stage: undefined stage label '{explicit}'"
            )
        return explicit
    referenced = {label for label, _ in events}
    free = [label for label in sources if label not in referenced]
    if len(free) == 1:
        return free[0]
    if not free:
        raise ScenarioError(
            "system.initial_stage: required because every stage label appears "
            "in events"
        )
    raise ScenarioError(
        f"system.initial_stage: ambiguous base stage, candidates {sorted(free)}"
    )


def _parse_initial(doc, model, m):
    initial = doc["initial"]
    _check_keys(initial, ("state", "operating_point", "angle_unit"), (), "initial")
    unit = initial.get("angle_unit", "radians")
    if unit not in ("radians", "degrees"):
        raise ScenarioError(
            f"initial.angle_unit: expected 'radians' or 'degrees', got {unit!r}"
        )
    has_state = "state" in initial
    has_op = "operating_point" in initial
    if has_state == has_op:
        raise ScenarioError("initial: exactly one of state / operating_point required")
    if has_op:
        op = initial["operating_point"]
        _check_keys(op, ("voltage", "current"), ("voltage", "current"), "initial.operating_point")
        volts = op["voltage"]
        currents = op["current"]
        for nm, lst in (("voltage", volts), ("current", currents)):
            if not isinstance(lst, list) or len(lst) != m:
                raise ScenarioError(
                    f"initial.operating_point.{nm}: expected a list of {m} phasors"
                )
        ops = []
        for k, (v, c) in enumerate(zip(volts, currents)):
            try:
                ops.append(
                    OperatingPoint(
                        parse_complex(v, f"initial.operating_point.voltage[{k}]"),
                        parse_complex(c, f"initial.operating_point.current[{k}]"),
                    )
                )
            except ValueError as exc:
                raise ScenarioError(f"initial.operating_point[{k}]: {exc}") from None
        return None, ops
    state = initial["state"]
    keys = ("delta", "omega") if model == MODEL_CLASSICAL else (
        "delta",
        "omega",
        "e_q_prime",
        "e_d_prime",
    )
    _check_keys(state, keys, keys, "initial.state")
    parts = [_float_list(state[k], m, f"initial.state.{k}") for k in keys]
    if unit == "degrees":
        parts[0] = list(np.radians(parts[0]))
    return np.concatenate([np.array(p, dtype=float) for p in parts]), None


def _parse_run(doc):
    run = doc["run"]
    _check_keys(
        run,
        ("t_end", "step", "stride", "frequency", "omega_s"),
        ("t_end", "step"),
        "run",
    )
    t_end = _as_float(run["t_end"], "run.t_end")
    step = _as_float(run["step"], "run.step")
    stride = _as_int(run.get("stride", 1), "run.stride")
    if "frequency" in run and "omega_s" in run:
        raise ScenarioError("run: give frequency or omega_s, not both")
    if "omega_s" in run:
        omega_s = _as_float(run["omega_s"], "run.omega_s")
    else:
        omega_s = 2.0 * math.pi * _as_float(run.get("frequency", 60.0), "run.frequency")
    return t_end, step, stride, omega_s


def _parse_output(doc):
    out = doc.get("output")
    if out is None:
        return None, 9
    _check_keys(out, ("path", "precision"), (), "output")
    path = out.get("path")
    if path is not None and not isinstance(path, str):
        raise ScenarioError("output.path: expected a string")
    precision = _as_int(out.get("precision", 9), "output.precision")
    if not (1 <= precision <= 17):
        raise ScenarioError(f"output.precision: must be in 1..17, got {precision}")
    return path, precision


def parse_scenario_text(text: str, name: str = "<scenario>") -> Scenario:
    """Parse and validate a scenario document given as a string."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioError(f"{name}: parse error: {exc}") from None
    if not isinstance(doc, dict):
        raise ScenarioError(f"{name}: expected a YAML mapping at top level")
    try:
        _check_keys(
            doc,
            ("system", "initial", "events", "run", "output"),
            ("system", "initial", "run"),
            "scenario",
        )
        system = doc["system"]
        _check_keys(
            system,
            ("model", "generators", "reduced", "network", "initial_stage"),
            ("model", "generators"),
            "system",
        )
        model = system["model"]
        if model not in (MODEL_CLASSICAL, MODEL_FOURTH_ORDER):
            raise ScenarioError(
                f"system.model: expected 'classical' or 'fourth_order', got {model!r}"
            )
        state_vec, ops = _parse_initial(doc, model, _count_generators(system))
        gens = _parse_generators(
            system["generators"], model, constants_forbidden=ops is not None
        )
        m = len(gens)
        sources = _parse_stage_sources(system, m)
        events = _parse_events(doc, sources)
        base = _base_label(system, sources, events)
        stages = [NetworkStage(label=base, t_start=0.0, **sources[base])]
        stages += [
            NetworkStage(label=label, t_start=time, **sources[label])
            for label, time in events
        ]
        t_end, step, stride, omega_s = _parse_run(doc)
        out_path, out_precision = _parse_output(doc)
        scenario = Scenario(
            model=model,
            generators=gens,
            stages=stages,
            t_end=t_end,
            step=step,
            omega_s=omega_s,
            stride=stride,
            initial_state=state_vec,
            operating_points=ops,
            output_path=out_path,
            output_precision=out_precision,
        )
        scenario.validate()
        return scenario
    except ScenarioError as exc:
        raise ScenarioError(f"{name}: {exc}") from None


def _count_generators(system) -> int:
    items = system.get("generators")
    if not isinstance(items, list) or not items:
        raise ScenarioError("system.generators: expected a non-empty list")
    return len(items)


def parse_scenario(path) -> Scenario:
    """Parse and validate a scenario file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"{path}: cannot read: {exc}") from None
    return parse_scenario_text(text, name=str(path))


def _gen_record(gen, model):
    rec = {}
    if gen.name:
        rec["name"] = gen.name
    if model == MODEL_CLASSICAL:
        rec.update(H=gen.h, D=gen.d, R_a=gen.r_a, X_d_prime=gen.x_d_prime)
        if gen.p_m is not None:
            rec["P_m"] = gen.p_m
        if gen.e_q_prime is not None:
            rec["e_q_prime"] = gen.e_q_prime
    else:
        rec.update(
            H=gen.h,
            D=gen.d,
            R_a=gen.r_a,
            X_d=gen.x_d,
            X_q=gen.x_q,
            X_d_prime=gen.x_d_prime,
            X_q_prime=gen.x_q_prime,
            T_d0_prime=gen.t_d0_prime,
            T_q0_prime=gen.t_q0_prime,
        )
        if gen.p_m is not None:
            rec["P_m"] = gen.p_m
        if gen.e_fq is not None:
            rec["E_fq"] = gen.e_fq
    return rec


def _source_entry(stage):
    if stage.y is not None:
        return "reduced", {"y": [[float(v) for v in row] for row in np.asarray(stage.y)]}
    if stage.y_t is not None:
        rows = [
            [format_complex(complex(v)) for v in row] for row in np.asarray(stage.y_t)
        ]
        return "reduced", {"y_t": rows}
    net = stage.network
    entry = {
        "n_nodes": int(net.n_nodes),
        "generator_nodes": [int(v) for v in net.generator_nodes],
        "branches": [[int(i), int(j), format_complex(complex(y))] for i, j, y in net.branches],
    }
    if net.shunts:
        entry["shunts"] = [[int(i), format_complex(complex(y))] for i, y in net.shunts]
    return "network", entry


def serialize_scenario(scenario: Scenario) -> str:
    """Canonical YAML form of a scenario; parsing it back gives an equal Scenario."""
    model = scenario.model
    system = {
        "model": model,
        "generators": [_gen_record(g, model) for g in scenario.generators],
    }
    reduced, network = {}, {}
    for stage in scenario.stages:
        kind, entry = _source_entry(stage)
        store = reduced if kind == "reduced" else network
        if stage.label in {**reduced, **network} and stage.label not in store:
            raise ScenarioError(
                f"stage label '{stage.label}' used with two different source kinds"
            )
        store[stage.label] = entry
    if reduced:
        system["reduced"] = reduced
    if network:
        system["network"] = network
    base = scenario.stages[0]
    events = [
        {"stage": st.label, "time": float(st.t_start)} for st in scenario.stages[1:]
    ]
    if any(ev["stage"] == base.label for ev in events):
        system["initial_stage"] = base.label
    doc = {"system": system}
    if scenario.operating_points is not None:
        doc["initial"] = {
            "operating_point": {
                "voltage": [format_complex(op.v_t) for op in scenario.operating_points],
                "current": [format_complex(op.i_t) for op in scenario.operating_points],
            }
        }
    else:
        m = scenario.m
        state = np.asarray(scenario.initial_state, dtype=float)
        entry = {
            "delta": [float(v) for v in state[:m]],
            "omega": [float(v) for v in state[m : 2 * m]],
        }
        if model == MODEL_FOURTH_ORDER:
            entry["e_q_prime"] = [float(v) for v in state[2 * m : 3 * m]]
            entry["e_d_prime"] = [float(v) for v in state[3 * m :]]
        doc["initial"] = {"state": entry}
    if events:
        doc["events"] = events
    doc["run"] = {
        "t_end": float(scenario.t_end),
        "step": float(scenario.step),
        "omega_s": float(scenario.omega_s),
        "stride": int(scenario.stride),
    }
    output = {}
    if scenario.output_path is not None:
        output["path"] = scenario.output_path
    if scenario.output_precision != 9:
        output["precision"] = int(scenario.output_precision)
    if output:
        doc["output"] = output
    return yaml.safe_dump(doc, sort_keys=False, default_flow_style=None, width=100)


def trajectory_columns(trajectory: Trajectory) -> list:
    names = ["t"]
    per_gen = (
        ("delta", "omega", "pe")
        if trajectory.model == MODEL_CLASSICAL
        else ("delta", "omega", "eqp", "edp", "pe")
    )
    for i in range(1, trajectory.m + 1):
        names.extend(f"{nm}_{i}" for nm in per_gen)
    return names


def format_trajectory(trajectory: Trajectory, precision: int = 9) -> str:
    """Render a trajectory as comma-delimited text with metadata comments."""
    m = trajectory.m
    n = trajectory.t.size
    cols = [trajectory.t]
    for i in range(m):
        cols.append(trajectory.states[:, i])
        cols.append(trajectory.states[:, m + i])
        if trajectory.model == MODEL_FOURTH_ORDER:
            cols.append(trajectory.states[:, 2 * m + i])
            cols.append(trajectory.states[:, 3 * m + i])
        cols.append(trajectory.p_e[:, i])
    lines = [
        "# swingsim trajectory",
        f"# model: {trajectory.model}",
        f"# generators: {m}",
        f"# step: {trajectory.step!r}",
    ]
    if trajectory.scenario_hash:
        lines.append(f"# scenario_sha256: {trajectory.scenario_hash}")
    lines.append(",".join(trajectory_columns(trajectory)))
    for k in range(n):
        lines.append(",".join(f"{col[k]:.{precision}f}" for col in cols))
    return "\n".join(lines) + "\n"


def write_trajectory(trajectory: Trajectory, path, precision: int = 9) -> None:
    Path(path).write_text(format_trajectory(trajectory, precision), encoding="utf-8")


def read_trajectory(path):
    """Read a trajectory file back; returns (column names, data array)."""
    names, rows = None, []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if names is None:
            names = line.split(",")
            continue
        rows.append([float(v) for v in line.split(",")])
    if names is None:
        raise ValueError(f"{path}: no header row found")
    return names, np.array(rows)
