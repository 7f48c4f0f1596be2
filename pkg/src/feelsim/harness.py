"""CLI, configuration, experiment orchestration, and result persistence.

Config files are INI (flat key = value under [network], [task], [run],
[sweep] sections); every key maps onto a config field and unknown keys fail
with the full key path.  An empty or missing file yields the documented
defaults (alpha=4, B=1e6 Hz, R=1, D_bits=16, 10 sample paths).

Outputs are deterministic byte-for-byte for fixed config and seeds: trial
rows are computed per-seed (optionally across a process pool, size from the
FEELSIM_WORKERS environment variable), sorted by (trial_id, round) before a
single writer emits them, and floats are printed with 17 significant
digits.

Exit codes: 0 success, 1 usage/config error, 2 validation failure,
3 rounds-to-target not reached.
"""

from __future__ import annotations

import argparse
import configparser
import dataclasses
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import checks, learning, simulator
from .analytics import NetworkConfig, build_bound_report
from .simulator import TrialRecord

TRIALS_SCHEMA = "feelsim-trials-v1"
SUMMARY_SCHEMA = "feelsim-summary-v1"
BOUNDS_SCHEMA = "feelsim-bounds-v1"
VALIDATION_SCHEMA = "feelsim-validation-v1"
SWEEP_SCHEMA = "feelsim-sweep-v1"

CSV_HEADER = ("trial_id,seed,round,active_count,effective,loss,"
              "grad_norm_sq,cum_latency_s,interference_power")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_NOT_REACHED = 3


class ConfigError(Exception):
    """Malformed configuration: unknown key, bad value, missing file."""


@dataclass
class ExperimentConfig:
    network: NetworkConfig
    task_kind: str = "quadratic"
    task_params: dict = field(default_factory=dict)
    task_seed: int = 0
    scheme: str = "digital"
    mobility: str = "low"
    n_sample_paths: int = 10
    seeds: list[int] = field(default_factory=list)
    sweep_parameter: str | None = None
    sweep_values: list[float] = field(default_factory=list)
    out_dir: str = "out"
    rounds_to_target: bool = False
    max_rounds: int = 4096

    def build_task(self) -> learning.LearningTask:
        params = dict(self.task_params)
        params["kind"] = self.task_kind
        return learning.build_task(params, task_seed=self.task_seed)

    def resolved_seeds(self) -> list[int]:
        if len(self.seeds) < self.n_sample_paths:
            raise ConfigError(
                f"run.seeds: need at least {self.n_sample_paths} seeds, "
                f"have {len(self.seeds)}")
        return self.seeds[: self.n_sample_paths]


_TASK_DEFAULTS = {
    "quadratic": {"S": 8, "L0": 1.0, "sigma2": 2.0},
    "logistic": {"S": 8, "n_samples_per_device": 20, "class_separation": 2.0},
}
_TASK_FIELD_TYPES = {
    "S": int, "L0": float, "sigma2": float,
    "n_samples_per_device": int, "class_separation": float,
}


def _parse_value(raw: str, target_type, key_path: str):
    raw = raw.strip()
    try:
        if target_type is bool:
            low = raw.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        if target_type is int:
            return int(raw)
        if target_type is float:
            return float(raw)
        return raw
    except ValueError as exc:
        raise ConfigError(f"{key_path}: {exc}") from None


def load_config(path: str | os.PathLike | None) -> ExperimentConfig:
    """Parse and validate an INI experiment config (None/empty -> defaults)."""
    parser = configparser.ConfigParser()
    parser.optionxform = str  # keys are case-sensitive field names (M, R, ...)
    if path is not None:
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"config file not found: {p}")
        try:
            parser.read_string(p.read_text(), source=str(p))
        except configparser.Error as exc:
            raise ConfigError(f"config parse error: {exc}") from None

    known_sections = {"network", "task", "run", "sweep"}
    unknown = set(parser.sections()) - known_sections
    if unknown:
        raise ConfigError(f"unknown config section(s): {sorted(unknown)}")

    net_fields = {f.name: f.type for f in dataclasses.fields(NetworkConfig)}
    net_types = {"lambda_d": float, "R": float, "M": int, "B": float,
                 "theta": float, "alpha": float, "P": float, "g_th": float,
                 "S": int, "D_bits": int, "t_cmp": float, "t_bc": float,
                 "delta": float, "epsilon0": float, "N": int,
                 "window_half_width": float, "interference_mode": str,
                 "freeze_fading": bool}
    net_kwargs = {}
    if parser.has_section("network"):
        for key, raw in parser.items("network"):
            if key not in net_fields:
                raise ConfigError(f"network.{key}: unknown key")
            net_kwargs[key] = _parse_value(raw, net_types[key],
                                           f"network.{key}")
    try:
        network = NetworkConfig(**net_kwargs)
    except ValueError as exc:
        raise ConfigError(f"network: {exc}") from None

    task_kind = "quadratic"
    task_seed = 0
    task_overrides = {}
    if parser.has_section("task"):
        for key, raw in parser.items("task"):
            if key == "kind":
                task_kind = raw.strip()
            elif key == "task_seed":
                task_seed = _parse_value(raw, int, "task.task_seed")
            elif key in _TASK_FIELD_TYPES:
                task_overrides[key] = _parse_value(
                    raw, _TASK_FIELD_TYPES[key], f"task.{key}")
            else:
                raise ConfigError(f"task.{key}: unknown key")
    if task_kind not in _TASK_DEFAULTS:
        raise ConfigError(f"task.kind: unknown task {task_kind!r} "
                          f"(choose from {sorted(_TASK_DEFAULTS)})")
    task_params = dict(_TASK_DEFAULTS[task_kind])
    for key, value in task_overrides.items():
        if key not in task_params:
            raise ConfigError(
                f"task.{key}: not a parameter of the {task_kind} task")
        task_params[key] = value

    # The model dimension is one quantity: the task gradient length and the
    # uplink payload size must agree, otherwise per-round latency is priced
    # for a different vector than the one being learned.  Whichever section
    # sets S explicitly wins; setting both to different values is an error.
    if "S" in task_overrides and "S" not in net_kwargs:
        try:
            network = replace(network, S=task_params["S"])
        except ValueError as exc:
            raise ConfigError(f"task.S: {exc}") from None
    elif "S" not in task_overrides:
        task_params["S"] = network.S
    elif task_params["S"] != network.S:
        raise ConfigError(
            f"task.S: value {task_params['S']} conflicts with network.S = "
            f"{network.S}; set one and the other follows")

    scheme, mobility = "digital", "low"
    n_paths, seed_base = 10, 1
    explicit_seeds: list[int] | None = None
    out_dir = "out"
    want_target, max_rounds = False, 4096
    if parser.has_section("run"):
        for key, raw in parser.items("run"):
            if key == "scheme":
                scheme = raw.strip()
            elif key == "mobility":
                mobility = raw.strip()
            elif key == "n_sample_paths":
                n_paths = _parse_value(raw, int, "run.n_sample_paths")
            elif key == "seed_base":
                seed_base = _parse_value(raw, int, "run.seed_base")
            elif key == "seeds":
                try:
                    explicit_seeds = [int(tok) for tok in raw.split(",")
                                      if tok.strip()]
                except ValueError as exc:
                    raise ConfigError(f"run.seeds: {exc}") from None
            elif key == "out_dir":
                out_dir = raw.strip()
            elif key == "rounds_to_target":
                want_target = _parse_value(raw, bool, "run.rounds_to_target")
            elif key == "max_rounds":
                max_rounds = _parse_value(raw, int, "run.max_rounds")
            else:
                raise ConfigError(f"run.{key}: unknown key")
    if scheme not in simulator.SCHEMES:
        raise ConfigError(f"run.scheme: must be one of {simulator.SCHEMES}, "
                          f"got {scheme!r}")
    if mobility not in simulator.MOBILITY_MODES:
        raise ConfigError(f"run.mobility: must be one of "
                          f"{simulator.MOBILITY_MODES}, got {mobility!r}")
    if n_paths < 1:
        raise ConfigError(f"run.n_sample_paths: must be >= 1, got {n_paths}")
    seeds = explicit_seeds if explicit_seeds is not None \
        else [seed_base + i for i in range(n_paths)]

    sweep_parameter, sweep_values = None, []
    if parser.has_section("sweep"):
        for key, raw in parser.items("sweep"):
            if key == "parameter":
                sweep_parameter = raw.strip()
            elif key == "values":
                try:
                    sweep_values = [float(tok) for tok in raw.split(",")
                                    if tok.strip()]
                except ValueError as exc:
                    raise ConfigError(f"sweep.values: {exc}") from None
            else:
                raise ConfigError(f"sweep.{key}: unknown key")
        if sweep_parameter is None or not sweep_values:
            raise ConfigError("sweep: needs both parameter and values")
        if sweep_parameter not in net_fields:
            raise ConfigError(f"sweep.parameter: {sweep_parameter!r} is not "
                              f"a network field")

    return ExperimentConfig(
        network=network, task_kind=task_kind, task_params=task_params,
        task_seed=task_seed, scheme=scheme, mobility=mobility,
        n_sample_paths=n_paths, seeds=seeds,
        sweep_parameter=sweep_parameter, sweep_values=sweep_values,
        out_dir=out_dir, rounds_to_target=want_target, max_rounds=max_rounds)


def expand_sweep(config: ExperimentConfig) -> list[tuple[float, ExperimentConfig]]:
    """Resolve the sweep axis into one config per value."""
    if config.sweep_parameter is None:
        raise ConfigError("sweep requested but config has no [sweep] section")
    points = []
    for value in config.sweep_values:
        cast = value
        net_types_int = {"M", "S", "D_bits", "N"}
        if config.sweep_parameter in net_types_int:
            cast = int(value)
        try:
            network = replace(config.network,
                              **{config.sweep_parameter: cast})
        except ValueError as exc:
            raise ConfigError(
                f"sweep value {config.sweep_parameter}={value}: {exc}"
            ) from None
        point = replace(config, network=network,
                        sweep_parameter=None, sweep_values=[])
        if config.sweep_parameter == "S":
            point = replace(point,
                            task_params={**config.task_params, "S": cast})
        points.append((value, point))
    return points


# ---------------------------------------------------------------------------
# trial execution (optionally across a process pool)
# ---------------------------------------------------------------------------

def _worker_run_trial(args: dict) -> tuple[int, TrialRecord]:
    """Module-level worker: rebuild config+task from plain dicts and run."""
    cfg = NetworkConfig(**args["network"])
    task = learning.build_task(args["task_params"],
                               task_seed=args["task_seed"])
    rec = simulator.run_trial(cfg, task, args["scheme"], args["mobility"],
                              args["seed"])
    return args["trial_id"], rec


def _worker_count() -> int:
    raw = os.environ.get("FEELSIM_WORKERS", "")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)


def run_trials(config: ExperimentConfig) -> list[tuple[int, TrialRecord]]:
    """All sample-path trials, as (trial_id, record), sorted by trial_id."""
    seeds = config.resolved_seeds()
    task_params = dict(config.task_params)
    task_params["kind"] = config.task_kind
    jobs = [{"network": config.network.to_dict(),
             "task_params": task_params, "task_seed": config.task_seed,
             "scheme": config.scheme, "mobility": config.mobility,
             "seed": seed, "trial_id": tid}
            for tid, seed in enumerate(seeds)]
    n_workers = _worker_count()
    if n_workers == 1 or len(jobs) == 1:
        results = [_worker_run_trial(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(_worker_run_trial, jobs))
    return sorted(results, key=lambda pair: pair[0])


# ---------------------------------------------------------------------------
# writers
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_trials_csv(path: Path, results: list[tuple[int, TrialRecord]]) -> None:
    lines = [f"# {TRIALS_SCHEMA}", CSV_HEADER]
    for trial_id, rec in results:
        cum = 0.0
        for r in rec.rounds:
            cum += r.round_latency
            lines.append(",".join([
                str(trial_id), str(rec.seed), str(r.n),
                str(r.active_count), str(int(r.effective)),
                _fmt(r.loss), _fmt(r.grad_norm_sq), _fmt(cum),
                _fmt(r.interference_power)]))
    path.write_text("\n".join(lines) + "\n")


def _sanitize(value):
    """Strict-JSON payloads: non-finite floats become null."""
    if isinstance(value, dict):
        return {k: _sanitize(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_sanitize(v) for v in value]
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(_sanitize(payload), indent=2, sort_keys=True,
                               allow_nan=False) + "\n")


def _experiment_payload(config: ExperimentConfig,
                        results: list[tuple[int, TrialRecord]]) -> dict:
    records = [rec for _, rec in results]
    summary = simulator.summarize_records(config.network, records)
    summary["schema"] = SUMMARY_SCHEMA
    summary["scheme"] = config.scheme
    summary["mobility"] = config.mobility
    summary["task"] = config.task_kind
    summary["config"] = records[0].config if records else {}
    summary["seeds"] = [rec.seed for rec in records]
    return summary


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_analytic(config: ExperimentConfig, out_dir: Path) -> int:
    task = config.build_task()
    report = build_bound_report(config.network, task.spec)
    payload = {"schema": BOUNDS_SCHEMA, "task": config.task_kind,
               "task_spec": dataclasses.asdict(task.spec),
               "network": config.network.to_dict()}
    payload.update(report.to_dict())
    _write_json(out_dir / "bounds.json", payload)
    print(f"wrote {out_dir / 'bounds.json'}")
    return EXIT_OK


def cmd_simulate(config: ExperimentConfig, out_dir: Path) -> int:
    results = run_trials(config)
    write_trials_csv(out_dir / "trials.csv", results)
    summary = _experiment_payload(config, results)
    exit_code = EXIT_OK
    if config.rounds_to_target:
        task = config.build_task()
        target = (config.network.epsilon0, config.network.delta)
        search = simulator.rounds_to_target(
            config.network, task, config.scheme, config.mobility,
            target=target, max_rounds=config.max_rounds,
            n_sample_paths=config.n_sample_paths,
            seeds=config.resolved_seeds())
        summary["rounds_to_target"] = {
            "reached": search.reached, "rounds": search.rounds,
            "max_rounds": search.max_rounds,
            "epsilon0": target[0], "delta": target[1],
            "history": [[n, frac] for n, frac in search.history]}
        if not search.reached:
            exit_code = EXIT_NOT_REACHED
    _write_json(out_dir / "summary.json", summary)
    print(f"wrote {out_dir / 'trials.csv'} and {out_dir / 'summary.json'}")
    return exit_code


def cmd_sweep(config: ExperimentConfig, out_dir: Path) -> int:
    points = expand_sweep(config)
    entries = []
    for value, point_config in points:
        results = run_trials(point_config)
        summary = _experiment_payload(point_config, results)
        entries.append({"parameter": config.sweep_parameter, "value": value,
                        "summary": summary})
    payload = {"schema": SWEEP_SCHEMA, "parameter": config.sweep_parameter,
               "values": config.sweep_values, "points": entries}
    _write_json(out_dir / "sweep.json", payload)
    print(f"wrote {out_dir / 'sweep.json'} ({len(entries)} points)")
    return EXIT_OK


def cmd_validate(config: ExperimentConfig, out_dir: Path, seed_base: int,
                 n_override: int | None) -> int:
    records = checks.run_all_checks(config.network, seed_base=seed_base,
                                    n_override=n_override)
    all_passed = all(rec.passed for rec in records)
    payload = {"schema": VALIDATION_SCHEMA,
               "network": config.network.to_dict(),
               "all_passed": all_passed,
               "checks": [rec.to_dict() for rec in records]}
    _write_json(out_dir / "validation.json", payload)
    for rec in records:
        status = "PASS" if rec.passed else "FAIL"
        print(f"{status} {rec.name}: analytic={rec.analytic:.8g} "
              f"empirical={rec.empirical:.8g} tol={rec.tolerance:.3g} "
              f"n={rec.n_samples}  {rec.detail}")
    print(f"wrote {out_dir / 'validation.json'}")
    return EXIT_OK if all_passed else EXIT_VALIDATION


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors -> exit code 1, not argparse's 2
        raise ConfigError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="feelsim",
                     description="Federated edge learning simulator and "
                                 "closed-form calculator")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("analytic", "write closed-form bound report (bounds.json)"),
        ("simulate", "run sample-path trials (trials.csv, summary.json)"),
        ("sweep", "run the config's sweep axis (sweep.json)"),
        ("validate", "run the Monte Carlo check registry (validation.json)"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", default=None,
                       help="INI config path (omit for defaults)")
        p.add_argument("--out", default=None,
                       help="output directory (default: config out_dir)")
        p.add_argument("--seed-base", type=int, default=None,
                       help="override the seed base")
        p.add_argument("--paths", type=int, default=None,
                       help="override the number of sample paths")
        p.add_argument("--mode", default=None,
                       choices=["analytic-matched", "cellular"],
                       help="override the interference mode")
        if name == "validate":
            p.add_argument("--trials", type=int, default=None,
                           help="override per-check Monte Carlo sample count")
    return parser


def _apply_overrides(config: ExperimentConfig,
                     args: argparse.Namespace) -> ExperimentConfig:
    if args.paths is not None:
        if args.paths < 1:
            raise ConfigError(f"--paths must be >= 1, got {args.paths}")
        config = replace(config, n_sample_paths=args.paths)
    if args.seed_base is not None:
        config = replace(config, seeds=[args.seed_base + i for i in
                                        range(config.n_sample_paths)])
    elif args.paths is not None and len(config.seeds) < config.n_sample_paths:
        base = config.seeds[0] if config.seeds else 1
        config = replace(config, seeds=[base + i for i in
                                        range(config.n_sample_paths)])
    if args.mode is not None:
        config = replace(config,
                         network=replace(config.network,
                                         interference_mode=args.mode))
    if args.out is not None:
        config = replace(config, out_dir=args.out)
    return config


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        config = load_config(args.config)
        config = _apply_overrides(config, args)
        out_dir = Path(config.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        if args.command == "analytic":
            return cmd_analytic(config, out_dir)
        if args.command == "simulate":
            return cmd_simulate(config, out_dir)
        if args.command == "sweep":
            return cmd_sweep(config, out_dir)
        if args.command == "validate":
            seed_base = args.seed_base if args.seed_base is not None else 0
            return cmd_validate(config, out_dir, seed_base, args.trials)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
