"""Command-line front end.

Exit codes: 0 when the requested certification verdict holds, 2 when it
does not, 1 on any error. The default output directory comes from the
CLUSTERSYNC_OUT_DIR environment variable when set.
"""
from __future__ import annotations

import argparse
import itertools
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

from .scenarios import (
    ConfigError,
    ScenarioConfig,
    builtin_scenarios,
    load_config,
    run,
    scenario_notes,
)

DEFAULT_OUT = "clustersync_runs"


def _out_dir(value: str | None) -> Path:
    if value:
        return Path(value)
    return Path(os.environ.get("CLUSTERSYNC_OUT_DIR", DEFAULT_OUT))


def _apply_flags(config: ScenarioConfig, args) -> ScenarioConfig:
    updates = {}
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.step is not None:
        updates["step"] = args.step
    if args.horizon is not None:
        updates["horizon"] = args.horizon
    if args.downsample is not None:
        updates["downsample"] = args.downsample
    return replace(config, **updates) if updates else config


def _write(directory: Path, name: str, content: str) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    (directory / name).write_text(content, encoding="utf-8")


def _emit(artifacts, out: Path, mode: str) -> None:
    if mode in ("certify", "full"):
        _write(out, "report.json", artifacts.report_json)
    if artifacts.trajectory_csv is not None:
        _write(out, "trajectory.csv", artifacts.trajectory_csv)
    if artifacts.metrics_csv is not None:
        _write(out, "metrics.csv", artifacts.metrics_csv)
    _write(out, "summary.txt", artifacts.summary + "\n")


def _parse_sweep(specs: list[str], n_clusters: int) -> list[tuple[str, list[float]]]:
    axes = []
    for spec in specs:
        key, _, csv = spec.partition("=")
        key = key.strip()
        if not csv:
            raise ConfigError(f"--sweep {spec!r}: expected KEY=V1,V2,...")
        values = [float(v) for v in csv.split(",")]
        if key != "c":
            if not (key.startswith("c") and key[1:].isdigit()):
                raise ConfigError(f"--sweep key must be 'c' or 'c<i>', got {key!r}")
            idx = int(key[1:])
            if not 1 <= idx <= n_clusters:
                raise ConfigError(f"--sweep key {key!r}: cluster index out of range")
        axes.append((key, values))
    return axes


def _sweep_variant(config: ScenarioConfig, assignment: dict[str, float]) -> ScenarioConfig:
    c = assignment.get("c", config.c)
    local = list(config.local)
    for key, value in assignment.items():
        if key != "c":
            local[int(key[1:]) - 1] = value
    return config.with_factors(c=c, local=local)


def _sweep_label(assignment: dict[str, float]) -> str:
    return "_".join(f"{k}={assignment[k]:g}" for k in sorted(assignment))


def _run_one(payload):
    config, mode, tol, label = payload
    try:
        artifacts = run(config, mode, tol=tol, label=label)
        return label, artifacts.exit_code, artifacts.summary, artifacts
    except Exception as exc:  # noqa: BLE001 - workers must not die silently
        return label, 1, f"scenario={label} error={exc}", None


def _execute(config: ScenarioConfig, mode: str, args, label: str) -> int:
    config = _apply_flags(config, args)
    out = _out_dir(args.out_dir)
    sweep_specs = getattr(args, "sweep", None) or []
    if not sweep_specs:
        artifacts = run(config, mode, tol=args.tol, label=label)
        _emit(artifacts, out, mode)
        print(artifacts.summary)
        return artifacts.exit_code

    axes = _parse_sweep(sweep_specs, len(config.partition))
    keys = [k for k, _ in axes]
    grid = [dict(zip(keys, combo)) for combo in itertools.product(*[v for _, v in axes])]
    payloads = []
    for assignment in grid:
        variant = _sweep_variant(config, assignment)
        payloads.append((variant, mode, args.tol, f"{label}_{_sweep_label(assignment)}"))

    worst = 0
    with ProcessPoolExecutor() as pool:
        for sub_label, code, summary, artifacts in pool.map(_run_one, payloads):
            if artifacts is not None:
                _emit(artifacts, out / sub_label, mode)
            print(summary)
            if code == 1 or (code == 2 and worst != 1):
                worst = code
    return worst


def _add_common(parser: argparse.ArgumentParser, sweep: bool) -> None:
    parser.add_argument("--seed", type=int, default=None, help="override the simulation seed")
    parser.add_argument("--step", type=float, default=None, help="override the integration step")
    parser.add_argument("--horizon", type=float, default=None, help="override the horizon")
    parser.add_argument("--downsample", type=int, default=None, help="keep every k-th sample")
    parser.add_argument("--tol", type=float, default=None,
                        help="tolerance for balance checks and the zero-eigenvalue census")
    parser.add_argument("--out-dir", default=None, help="output directory")
    if sweep:
        parser.add_argument("--sweep", action="append", default=None, metavar="KEY=V1,V2",
                            help="factor grid axis (KEY is 'c' or 'c<i>'); repeatable")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="clustersync",
        description="certify and simulate cluster synchronization of coupled linear agents",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for mode in ("certify", "simulate", "full"):
        p = sub.add_parser(mode, help=f"{mode} a scenario configuration")
        p.add_argument("config", help="path to a scenario JSON document")
        _add_common(p, sweep=mode != "simulate")

    p = sub.add_parser("list-scenarios", help="list the built-in scenarios")

    p = sub.add_parser("run-builtin", help="run one built-in scenario")
    p.add_argument("name", help="scenario name (see list-scenarios)")
    p.add_argument("--mode", choices=("certify", "simulate", "full"), default="full")
    _add_common(p, sweep=True)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "list-scenarios":
            notes = scenario_notes()
            for name in builtin_scenarios():
                print(f"{name}: {notes[name]}")
            return 0
        if args.command == "run-builtin":
            scenarios = builtin_scenarios()
            if args.name not in scenarios:
                print(f"unknown scenario {args.name!r}; try list-scenarios", file=sys.stderr)
                return 1
            return _execute(scenarios[args.name], args.mode, args, args.name)
        config = load_config(args.config)
        return _execute(config, args.command, args, Path(args.config).stem)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
