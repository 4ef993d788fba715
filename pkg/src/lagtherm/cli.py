"""Command-line runner: scenario files in, CSV tables and JSON reports out.

Exit codes: 0 success, 1 an enabled audit failed, 2 the scenario or a model
invariant was rejected, 3 the simulation itself failed.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__, catalog
from .diagnostics import DEFAULT_THRESHOLDS, audit, gradient_check
from .errors import InvariantViolation, ParseError, ThermoError
from .integrate import EquilibriumHook, IntegratorConfig, Trajectory, simulate

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

EXIT_OK, EXIT_AUDIT, EXIT_INVALID, EXIT_SIMULATION = 0, 1, 2, 3
OUT_DIR_ENV = "LAGTHERM_OUT_DIR"
CHECKS = ("energy", "second_law", "mass", "entropy_monotone", "equilibrium", "gradient")
_TOP_KEYS = {"model", "seed", "params", "initial", "integrator", "outputs", "audits", "stop"}
_MAIN_COLUMNS = ("E", "P_W_ext", "P_H_ext", "I_internal", "S_total")


@dataclass
class Scenario:
    model: str
    params: dict
    initial: dict
    integrator: IntegratorConfig
    built: catalog.Built
    seed: int = 0
    checks: tuple = ("energy", "second_law", "mass")
    thresholds: dict = field(default_factory=dict)
    gaps: dict = field(default_factory=dict)
    gradient_states: int = 100
    stop_at_equilibrium: bool = False
    hold: float = 1.0
    out_dir: Optional[str] = None
    prefix: str = "run"
    snapshots: int = 5
    source: dict = field(default_factory=dict)


# --------------------------------------------------------------------------- parsing


def _table(raw, key, where="scenario"):
    val = raw.get(key, {})
    if not isinstance(val, dict):
        raise ParseError(f"{where}: field {key!r} must be a table")
    return val


def _reject_unknown(tab, allowed, where):
    extra = sorted(set(tab) - set(allowed))
    if extra:
        raise ParseError(f"{where}: unknown field(s) {extra}; expected some of {sorted(allowed)}")


def _integrator(name, given) -> IntegratorConfig:
    cfg = dict(catalog.get(name).integrator)
    types = {f.name: f.type for f in dataclasses.fields(IntegratorConfig)}
    _reject_unknown(given, types, "integrator")
    for k, v in given.items():
        kind = types[k]
        if kind == "str":
            ok = isinstance(v, str)
        elif kind == "int":
            ok = isinstance(v, int) and not isinstance(v, bool)
        else:
            ok = isinstance(v, (int, float)) and not isinstance(v, bool)
            v = float(v) if ok else v
        if not ok:
            raise ParseError(f"integrator: field {k!r} has invalid value {v!r}")
        cfg[k] = v
    try:
        return IntegratorConfig(**cfg)
    except ValueError as exc:
        raise ParseError(f"integrator: {exc}") from exc


def _float_map(tab, where):
    out = {}
    for k, v in tab.items():
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ParseError(f"{where}: field {k!r} must be a number")
        out[k] = float(v)
    return out


def scenario_from_dict(raw: dict, default_prefix: str = "run") -> Scenario:
    """Validate a decoded scenario table and build its model eagerly."""
    _reject_unknown(raw, _TOP_KEYS, "scenario")
    model = raw.get("model")
    inline = {}
    if isinstance(model, dict):
        inline = dict(model)
        model = inline.pop("name", None)
    if not isinstance(model, str):
        raise ParseError("scenario: field 'model' must be a catalog name or a table with 'name'")
    params = dict(_table(raw, "params"))
    clash = sorted(set(params) & set(inline))
    if clash:
        raise ParseError(f"model: parameter(s) {clash} given both inline and in [params]")
    params.update(inline)
    initial = _table(raw, "initial")
    seed = raw.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ParseError("scenario: field 'seed' must be an integer")

    p, i = catalog.resolve(model, params, initial)
    try:
        built = catalog.build(model, p, i)
        built.system.check(built.y0)
    except (ParseError, InvariantViolation):
        raise
    except (ThermoError, ValueError, ArithmeticError) as exc:
        raise ParseError(f"{model}: {exc}") from exc
    cfg = _integrator(model, _table(raw, "integrator"))

    aud = _table(raw, "audits")
    _reject_unknown(aud, {"checks", "thresholds", "gaps", "gradient_states"}, "audits")
    checks = aud.get("checks", ["energy", "second_law", "mass"])
    if not isinstance(checks, list) or any(c not in CHECKS for c in checks):
        raise ParseError(f"audits: field 'checks' must list names from {list(CHECKS)}")
    thresholds = _float_map(_table(aud, "thresholds", "audits"), "audits.thresholds")
    _reject_unknown(thresholds, set(DEFAULT_THRESHOLDS) | {"gradient"}, "audits.thresholds")
    gaps = dict(built.equilibrium)
    gaps.update(_float_map(_table(aud, "gaps", "audits"), "audits.gaps"))
    n_grad = aud.get("gradient_states", 100)
    if isinstance(n_grad, bool) or not isinstance(n_grad, int) or n_grad < 1:
        raise ParseError("audits: field 'gradient_states' must be a positive integer")

    stop = _table(raw, "stop")
    _reject_unknown(stop, {"at_equilibrium", "hold"}, "stop")
    at_eq = stop.get("at_equilibrium", False)
    hold = stop.get("hold", 1.0)
    if not isinstance(at_eq, bool) or isinstance(hold, bool) or not isinstance(hold, (int, float)) or hold < 0:
        raise ParseError("stop: 'at_equilibrium' must be a boolean and 'hold' a nonnegative number")
    if at_eq and not gaps:
        raise ParseError(f"stop: {model} records no equilibrium gaps")

    outs = _table(raw, "outputs")
    _reject_unknown(outs, {"dir", "prefix", "snapshots"}, "outputs")
    out_dir = outs.get("dir")
    prefix = outs.get("prefix", default_prefix)
    snaps = outs.get("snapshots", 5)
    if out_dir is not None and not isinstance(out_dir, str):
        raise ParseError("outputs: field 'dir' must be a string")
    if not isinstance(prefix, str) or not prefix or os.sep in prefix:
        raise ParseError("outputs: field 'prefix' must be a plain file name stem")
    if isinstance(snaps, bool) or not isinstance(snaps, int) or snaps < 0:
        raise ParseError("outputs: field 'snapshots' must be a nonnegative integer")

    return Scenario(
        model=model,
        params=p,
        initial=i,
        integrator=cfg,
        built=built,
        seed=seed,
        checks=tuple(checks),
        thresholds=thresholds,
        gaps=gaps,
        gradient_states=n_grad,
        stop_at_equilibrium=at_eq,
        hold=float(hold),
        out_dir=out_dir,
        prefix=prefix,
        snapshots=snaps,
        source=raw,
    )


def parse_scenario(path) -> Scenario:
    """Read a TOML scenario file and validate it, building the model eagerly."""
    path = Path(path)
    try:
        with path.open("rb") as fh:
            raw = tomllib.load(fh)
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror or exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    sc = scenario_from_dict(raw, default_prefix=path.stem)
    if sc.out_dir is not None and not os.path.isabs(sc.out_dir):
        sc.out_dir = str(path.parent / sc.out_dir)
    return sc


# --------------------------------------------------------------------------- output


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(obj), fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")


def trajectory_columns(traj: Trajectory, include_state: bool = True) -> list:
    """Column order: t, state, temperatures, balance terms, remaining diagnostics."""
    cols = ["t"] + (list(traj.labels) if include_state else [])
    diag = list(traj.diagnostics)
    temps = [k for k in diag if k == "T" or (k.startswith("T") and k[1:].isdigit())]
    main = [k for k in _MAIN_COLUMNS if k in traj.diagnostics]
    for k in temps + main + diag:
        if k not in cols:
            cols.append(k)
    return cols


def write_trajectory_csv(path, traj: Trajectory, include_state: bool = True):
    cols = trajectory_columns(traj, include_state)
    data = [traj.t]
    idx = {lab: j for j, lab in enumerate(traj.labels)}
    for c in cols[1:]:
        data.append(traj.y[:, idx[c]] if include_state and c in idx else traj.diagnostics[c])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for row in zip(*data):
            w.writerow([_fmt(x) for x in row])
    return cols


def read_trajectory_csv(path) -> Trajectory:
    """Load a trajectory table; every column other than ``t`` becomes a diagnostic."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror or exc}") from exc
    if not rows or "t" not in rows[0]:
        raise ParseError(f"{path}: missing header with a 't' column")
    header = rows[0]
    try:
        arr = np.array([[float(x) for x in r] for r in rows[1:] if r], dtype=float).reshape(-1, len(header))
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    cols = {h: arr[:, j] for j, h in enumerate(header)}
    t = cols.pop("t")
    return Trajectory(t=t, y=np.zeros((t.size, 0)), diagnostics=cols, labels=[])


def write_field_snapshot(path, table: dict):
    cols = list(table)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for row in zip(*(table[c] for c in cols)):
            w.writerow([_fmt(x) for x in row])


def _snapshot_indices(n_samples: int, count: int) -> list:
    if count <= 0 or n_samples == 0:
        return []
    if count == 1:
        return [n_samples - 1]
    return sorted(set(np.linspace(0, n_samples - 1, count).round().astype(int).tolist()))


# --------------------------------------------------------------------------- running


@dataclass
class RunResult:
    exit_code: int
    report: dict
    files: list
    status: str


def _resolve_out_dir(flag: Optional[str], scenario: Scenario) -> Path:
    if flag:
        return Path(flag)
    if scenario.out_dir:
        return Path(scenario.out_dir)
    return Path(os.environ.get(OUT_DIR_ENV) or "lagtherm_out")


def _manifest(sc: Scenario, status, files, error=None, n_samples=0) -> dict:
    m = {
        "tool": "lagtherm",
        "version": __version__,
        "scenario": sc.source,
        "resolved": {
            "model": sc.model,
            "params": sc.params,
            "initial": sc.initial,
            "integrator": dataclasses.asdict(sc.integrator),
            "seed": sc.seed,
            "checks": list(sc.checks),
            "thresholds": sc.thresholds,
            "gaps": sc.gaps,
            "stop_at_equilibrium": sc.stop_at_equilibrium,
            "hold": sc.hold,
        },
        "status": status,
        "samples": n_samples,
        "files": files,
    }
    if error is not None:
        m["error"] = error
    return m


def run_scenario(sc: Scenario, out_dir: Optional[str] = None, seed: Optional[int] = None) -> RunResult:
    """Integrate, write the trajectory/field tables, the audit report and the manifest."""
    if seed is not None:
        sc.seed = seed
    out = _resolve_out_dir(out_dir, sc)
    out.mkdir(parents=True, exist_ok=True)
    built = sc.built
    hooks = [EquilibriumHook(dict(sc.gaps), sc.hold)] if sc.stop_at_equilibrium else []
    error = None
    try:
        traj = simulate(built.system, built.y0, sc.integrator, hooks)
    except (ThermoError, ArithmeticError, ValueError) as exc:
        traj = getattr(exc, "trajectory", None)
        error = f"{type(exc).__name__}: {exc}"

    files = []
    continuum = built.kind == "continuum"
    if traj is not None and len(traj):
        name = f"{sc.prefix}_totals.csv" if continuum else f"{sc.prefix}.csv"
        write_trajectory_csv(out / name, traj, include_state=not continuum)
        files.append(name)
        if continuum:
            for k, i in enumerate(_snapshot_indices(len(traj), sc.snapshots)):
                snap = f"{sc.prefix}_field_{k:03d}.csv"
                write_field_snapshot(out / snap, built.system.field_table(traj.y[i]))
                files.append({"file": snap, "t": float(traj.t[i])})

    if error is not None:
        report = {"passed": False, "failures": [f"simulation error: {error}"]}
        name = f"{sc.prefix}_audit.json"
        write_json(out / name, report)
        files.append(name)
        write_json(out / f"{sc.prefix}_manifest.json", _manifest(sc, "failed", files, error, len(traj) if traj else 0))
        return RunResult(EXIT_SIMULATION, report, files, "failed")

    traj_checks = tuple(c for c in sc.checks if c != "gradient")
    rep = audit(traj, traj_checks, sc.thresholds, gaps=sc.gaps or None)
    report = rep.to_dict()
    report["checks"] = list(sc.checks)
    report["status"] = traj.status
    if "gradient" in sc.checks:
        thr = sc.thresholds.get("gradient", 1e-6)
        if built.model is None or getattr(built.model, "sampler", None) is None:
            report["notes"].append(f"{sc.model} has no analytic partials to check")
            report["gradient_error"] = None
        else:
            g = gradient_check(built.model, sc.gradient_states, sc.seed)
            report["gradient_error"] = g
            if not g <= thr:
                report["failures"].append(f"gradient error {g:.3e} > {thr:.1e}")
                report["passed"] = False
    name = f"{sc.prefix}_audit.json"
    write_json(out / name, report)
    files.append(name)
    write_json(out / f"{sc.prefix}_manifest.json", _manifest(sc, traj.status, files, None, len(traj)))
    return RunResult(EXIT_OK if report["passed"] else EXIT_AUDIT, report, files, traj.status)


# --------------------------------------------------------------------------- commands


def _say(args, msg):
    if not args.quiet:
        print(msg)


def _summary_lines(report: dict) -> list:
    lines = []
    for key, label in (
        ("max_energy_residual", "energy residual"),
        ("min_internal_production", "min internal production"),
        ("mass_residual", "mass residual"),
        ("gradient_error", "gradient error"),
    ):
        if report.get(key) is not None:
            lines.append(f"  {label}: {report[key]:.3e}")
    if report.get("entropy_monotone") is not None:
        lines.append(f"  entropy monotone: {report['entropy_monotone']}")
    if report.get("equilibrium"):
        lines.append(f"  equilibrium at t = {report['equilibrium']['time']:.6g}")
    for f in report.get("failures", []):
        lines.append(f"  FAIL {f}")
    return lines


def cmd_run(args) -> int:
    sc = parse_scenario(args.scenario)
    res = run_scenario(sc, args.out_dir, args.seed)
    verdict = {EXIT_OK: "passed", EXIT_AUDIT: "audit failed", EXIT_SIMULATION: "simulation failed"}[res.exit_code]
    _say(args, f"{sc.model}: {verdict} ({res.status})")
    for line in _summary_lines(res.report):
        _say(args, line)
    return res.exit_code


def cmd_catalog(args) -> int:
    items = catalog.listing(args.filter)
    if args.json:
        print(json.dumps(_jsonable(items), indent=2, sort_keys=True))
        return EXIT_OK
    for it in items:
        print(f"{it['name']}  [{it['kind']}]  {it['reproduces']}")
        print(f"    {it['summary']}")
        for group in ("params", "initial"):
            parts = [f"{k}={v['default']!r}" for k, v in it[group].items()]
            print(f"    {group}: " + (", ".join(parts) if parts else "(none)"))
    return EXIT_OK


def cmd_audit(args) -> int:
    traj = read_trajectory_csv(args.trajectory)
    d = traj.diagnostics
    checks = []
    if {"E", "P_W_ext", "P_H_ext"} <= set(d):
        checks.append("energy")
    if "I_internal" in d:
        checks.append("second_law")
    if "mass_total" in d:
        checks.append("mass")
    if not checks:
        raise ParseError(f"{args.trajectory}: no auditable columns")
    rep = audit(traj, tuple(checks)).to_dict()
    rep["checks"] = checks
    if args.report:
        write_json(args.report, rep)
    _say(args, f"{args.trajectory}: {'passed' if rep['passed'] else 'audit failed'}")
    for line in _summary_lines(rep):
        _say(args, line)
    return EXIT_OK if rep["passed"] else EXIT_AUDIT


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out-dir", help=f"output directory (default: ${OUT_DIR_ENV} or ./lagtherm_out)")
    common.add_argument("--seed", type=int, help="seed for randomized checks (overrides the scenario)")
    common.add_argument("--quiet", action="store_true", help="print nothing on success")
    ap = argparse.ArgumentParser(prog="lagtherm", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"lagtherm {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", parents=[common], help="run a scenario file")
    p.add_argument("scenario")
    p.set_defaults(func=cmd_run)
    p = sub.add_parser("catalog", parents=[common], help="list builtin models")
    p.add_argument("filter", nargs="?")
    p.add_argument("--json", action="store_true", help="emit the listing as JSON")
    p.set_defaults(func=cmd_catalog)
    p = sub.add_parser("audit", parents=[common], help="audit a trajectory CSV")
    p.add_argument("trajectory")
    p.add_argument("report", nargs="?", help="write the audit report as JSON here")
    p.set_defaults(func=cmd_audit)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InvariantViolation as exc:
        print(f"error: invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ThermoError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SIMULATION


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
