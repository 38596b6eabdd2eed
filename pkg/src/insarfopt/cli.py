"""Command-line entry point: ``insarfopt solve|sweep|oracle|report``.

Exit codes: 0 success, 1 usage or I/O error, 2 infeasible scenario.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

from .geometry import Formation
from .insar_metrics import compute_metrics
from .oracle import Axis, EmptyGridError, GridSpec, grid_search
from .scenario import ScenarioConfig, ScenarioError, fingerprint, load_scenario, with_overrides
from .sca_ao import (
    MODES,
    InfeasibleScenarioError,
    SCAConfig,
    documented_initializations,
)

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE = 0, 1, 2

SWEEP_PARAMS = {
    "p_com_max": "comm.P_com_max",
    "h_amb_max": "thresholds.h_amb_max",
    "gamma_snr_min": "thresholds.gamma_snr_min",
    "gamma_rg_min": "thresholds.gamma_rg_min",
}
SWEEP_MODES = ("proposed", "benchmark1", "benchmark2", "oracle")
SWEEP_COLUMNS = ("value", "mode", "coverage_m2", "b_perp_m", "h_amb_m", "converged", "status")
REPORT_COLUMNS = ("label", "mode", "coverage_m2", "b_perp_m", "h_amb_m", "energy1_j",
                  "energy2_j", "feasible", *(f"slack_C{i}" for i in range(1, 12)))


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit with status 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def default_jobs() -> int:
    raw = os.environ.get("INSARFOPT_JOBS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _parse_sets(items: Sequence[str] | None) -> dict[str, str]:
    out: dict[str, str] = {}
    for item in items or ():
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise UsageError(f"--set expects section.key=value, got {item!r}")
        value = value.strip()
        try:
            out[key.strip()] = json.loads(value)
        except json.JSONDecodeError:
            out[key.strip()] = value
    return out


def _load(path: str, sets: Sequence[str] | None) -> ScenarioConfig:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        s = load_scenario(path)
        overrides = _parse_sets(sets)
        return with_overrides(s, overrides) if overrides else s


def _axis(text: str | None, default: Axis) -> Axis:
    if text is None:
        return default
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"grid axis must be START:STOP:STEP, got {text!r}")
    try:
        return Axis(*(float(p) for p in parts))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _init_from_args(args: argparse.Namespace, s: ScenarioConfig) -> Formation | None:
    if args.init is not None:
        try:
            x1, z1, x2, z2 = (float(v) for v in args.init.split(","))
            return Formation((x1, z1), (x2, z2))
        except ValueError as exc:
            raise UsageError(f"--init expects X1,Z1,X2,Z2: {exc}") from exc
    if args.init_preset is not None:
        return documented_initializations(s)[args.init_preset - 1]
    return None


# ---------------------------------------------------------------- solve

def cmd_solve(args: argparse.Namespace) -> int:
    s = _load(args.scenario, args.set)
    init = _init_from_args(args, s)
    cfg = SCAConfig(epsilon=args.epsilon, max_outer=args.max_outer)
    report = MODES[args.mode](s, init, cfg=cfg)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    report.write_json(out / "run_report.json", s)
    report.write_trace_csv(out / "trace.csv")
    report.write_schedules_csv(out / "schedules.csv", s)
    print(f"{args.mode}: coverage {report.coverage_m2:.3f} m^2, "
          f"outer iterations {report.outer_iterations}, converged {report.converged}")
    if not report.converged:
        print("warning: outer iteration cap reached before convergence", file=sys.stderr)
    return EXIT_OK


# ---------------------------------------------------------------- sweep

@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    values: tuple[str, ...]
    modes: tuple[str, ...]

    def __post_init__(self) -> None:
        if self.parameter not in SWEEP_PARAMS:
            raise UsageError(f"unknown sweep parameter {self.parameter!r}; "
                             f"choose from {', '.join(SWEEP_PARAMS)}")
        if not self.values:
            raise UsageError("sweep needs at least one value")
        bad = [m for m in self.modes if m not in SWEEP_MODES]
        if bad or not self.modes:
            raise UsageError(f"unknown sweep mode(s) {bad}; choose from {', '.join(SWEEP_MODES)}")


def _fmt(v: float | None) -> str:
    return "" if v is None or (isinstance(v, float) and not math.isfinite(v)) else repr(float(v))


def _sweep_row(job: tuple[ScenarioConfig, str, str, str, float]) -> list[str]:
    s, key, value, mode, oracle_step = job
    try:
        sv = with_overrides(s, {key: value})
    except ScenarioError as exc:
        return [value, mode, "", "", "", "false", f"error: {exc}"]
    try:
        if mode == "oracle":
            res = grid_search(sv, GridSpec.default(sv, oracle_step))
            if not res.found:
                return [value, mode, "", "", "", "false", "infeasible"]
            m = compute_metrics(res.formation, sv)
            return [value, mode, _fmt(res.coverage_m2), _fmt(m.b_perp), _fmt(m.h_amb), "true", "ok"]
        rep = MODES[mode](sv)
        m = compute_metrics(rep.formation, sv)
        return [value, mode, _fmt(rep.coverage_m2), _fmt(m.b_perp), _fmt(m.h_amb),
                "true" if rep.converged else "false", "ok"]
    except InfeasibleScenarioError:
        return [value, mode, "", "", "", "false", "infeasible"]
    except Exception as exc:  # a failed row must not sink the sweep
        return [value, mode, "", "", "", "false", f"error: {type(exc).__name__}: {exc}"]


def run_sweep(s: ScenarioConfig, spec: SweepSpec, jobs: int = 1,
              oracle_step: float = 1.0) -> list[list[str]]:
    key = SWEEP_PARAMS[spec.parameter]
    work = [(s, key, v, mode, oracle_step) for v in spec.values for mode in spec.modes]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_sweep_row, work))
    return [_sweep_row(w) for w in work]


def cmd_sweep(args: argparse.Namespace) -> int:
    s = _load(args.scenario, args.set)
    modes = tuple(m.strip() for m in args.modes.split(",") if m.strip())
    spec = SweepSpec(args.param, tuple(args.values), modes)
    rows = run_sweep(s, spec, args.jobs, args.oracle_step)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "sweep.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        w.writerows(rows)
    failed = sum(1 for r in rows if r[-1] != "ok")
    print(f"sweep {spec.parameter}: {len(rows)} rows, {failed} without a solution")
    return EXIT_OK


# ---------------------------------------------------------------- oracle

def cmd_oracle(args: argparse.Namespace) -> int:
    s = _load(args.scenario, args.set)
    base = GridSpec.default(s, args.step)
    spec = GridSpec(_axis(args.z1, base.z1), _axis(args.x2, base.x2), _axis(args.z2, base.z2))
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    dump = out / "feasible.csv" if args.dump_feasible else None
    res = grid_search(s, spec, dump_path=dump, jobs=args.jobs)
    payload = {
        "scenario_fingerprint": fingerprint(s),
        "grid": {name: {"start": ax.start, "stop": ax.stop, "step": ax.step}
                 for name, ax in (("z1", spec.z1), ("x2", spec.x2), ("z2", spec.z2))},
        **res.to_json(),
    }
    payload["b_perp_m"] = payload["h_amb_m"] = None
    if res.found:
        m = compute_metrics(res.formation, s)
        payload["b_perp_m"] = m.b_perp
        payload["h_amb_m"] = None if math.isinf(m.h_amb) else m.h_amb
    (out / "oracle.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                                     encoding="utf-8")
    if not res.found:
        print(f"no feasible grid point among {res.total_count}", file=sys.stderr)
        return EXIT_INFEASIBLE
    print(f"oracle: coverage {res.coverage_m2:.3f} m^2, feasible {res.feasible_count}"
          f" of {res.total_count}")
    return EXIT_OK


# ---------------------------------------------------------------- report

def _report_row(label: str, data: dict[str, Any]) -> list[str]:
    cons = data["constraints"]
    return [label, data["mode"], _fmt(data["coverage_m2"]), _fmt(data["b_perp_m"]),
            _fmt(data["h_amb_m"]), _fmt(data["energy_j"][0]), _fmt(data["energy_j"][1]),
            "true" if all(c["satisfied"] for c in cons.values()) else "false",
            *(_fmt(cons[f"C{i}"]["slack"]) for i in range(1, 12))]


def cmd_report(args: argparse.Namespace) -> int:
    loaded: list[tuple[str, dict[str, Any]]] = []
    for path in args.reports:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
            data["coverage_m2"], data["constraints"], data["mode"]  # schema probe
        except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
            print(f"error: cannot read run report {path}: {exc}", file=sys.stderr)
            return EXIT_USAGE
        loaded.append((str(path), data))
    prints = {d["scenario_fingerprint"] for _, d in loaded}
    if len(prints) > 1:
        print("error: reports come from different scenarios (fingerprints "
              + ", ".join(sorted(prints)) + ")", file=sys.stderr)
        return EXIT_USAGE

    rows = [_report_row(label, d) for label, d in loaded]
    head = ("label", "mode", "coverage_m2", "b_perp_m", "h_amb_m", "energy1_j", "energy2_j",
            "feasible")
    widths = [max(len(h), *(len(_short(r[i])) for r in rows)) for i, h in enumerate(head)]
    print("  ".join(h.ljust(w) for h, w in zip(head, widths)))
    for r in rows:
        print("  ".join(_short(v).ljust(w) for v, w in zip(r, widths)))
    deltas = []
    for i in range(len(loaded)):
        for j in range(i + 1, len(loaded)):
            d = loaded[i][1]["coverage_m2"] - loaded[j][1]["coverage_m2"]
            deltas.append((loaded[i][0], loaded[j][0], d))
    if deltas:
        print("\ncoverage deltas (m^2)")
        for a, b, d in deltas:
            print(f"  {a} - {b}: {d:+.3f}")

    csv_path = Path(args.csv)
    try:
        with open(csv_path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(REPORT_COLUMNS)
            w.writerows(rows)
        if deltas:
            with open(csv_path.with_name(csv_path.stem + "_deltas.csv"), "w", newline="",
                      encoding="utf-8") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(("a", "b", "delta_coverage_m2"))
                w.writerows([a, b, repr(d)] for a, b, d in deltas)
    except OSError as exc:
        print(f"error: cannot write {csv_path}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


def _short(v: str) -> str:
    try:
        return f"{float(v):.4f}"
    except ValueError:
        return v


# ---------------------------------------------------------------- wiring

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="insarfopt", description="Two-UAV InSAR formation and power optimization")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("scenario", help="scenario file (TOML)")
        sp.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE",
                        help="override a scenario field; repeatable")
        sp.add_argument("-o", "--output", default=".", help="output directory")

    sp = sub.add_parser("solve", help="run the optimizer or a benchmark")
    common(sp)
    sp.add_argument("--mode", choices=sorted(MODES), default="proposed")
    grp = sp.add_mutually_exclusive_group()
    grp.add_argument("--init", metavar="X1,Z1,X2,Z2", help="explicit starting formation")
    grp.add_argument("--init-preset", type=int, choices=(1, 2, 3),
                     help="one of the three documented starting formations")
    sp.add_argument("--epsilon", type=float, default=1e-4, help="relative stop tolerance")
    sp.add_argument("--max-outer", type=int, default=30, help="outer iteration cap")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("sweep", help="sweep one parameter across modes")
    common(sp)
    sp.add_argument("--param", required=True, choices=sorted(SWEEP_PARAMS))
    sp.add_argument("--values", required=True, nargs="+",
                    help='values, optionally with units, e.g. "-5 dBm" 0.01')
    sp.add_argument("--modes", default="proposed,benchmark1,benchmark2",
                    help="comma-separated subset of " + ",".join(SWEEP_MODES))
    sp.add_argument("--oracle-step", type=float, default=1.0, help="grid step for oracle rows")
    sp.add_argument("--jobs", type=int, default=default_jobs(),
                    help="worker processes (default $INSARFOPT_JOBS or 1)")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("oracle", help="brute-force grid search")
    common(sp)
    sp.add_argument("--step", type=float, default=1.0, help="step for every default axis")
    sp.add_argument("--z1", metavar="START:STOP:STEP")
    sp.add_argument("--x2", metavar="START:STOP:STEP")
    sp.add_argument("--z2", metavar="START:STOP:STEP")
    sp.add_argument("--dump-feasible", action="store_true", help="also write feasible.csv")
    sp.add_argument("--jobs", type=int, default=default_jobs(),
                    help="worker processes (default $INSARFOPT_JOBS or 1)")
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("report", help="compare run_report.json files")
    sp.add_argument("reports", nargs="+", help="run_report.json paths")
    sp.add_argument("--csv", default="report.csv", help="comparison CSV path")
    sp.set_defaults(func=cmd_report)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "jobs", 1) < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ScenarioError as exc:
        print(f"error: invalid scenario: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, EmptyGridError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InfeasibleScenarioError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
