"""Command-line front end: experiment orchestration and file outputs.

Subcommands: gap, ising-bound, disorder, kappa, fit, plot-data. Configuration
comes from an optional flat key=value file plus flag overrides (flags win).
Exit codes: 0 success, 2 configuration/usage error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import analysis, freefermion, models
from .runio import (
    ConfigError,
    RunConfig,
    build_config,
    env_workers,
    parse_config_file,
    read_csv,
    require_schema,
    write_csv,
    write_json,
)

logger = logging.getLogger("rampmcmc")

GAP_HEADER = [
    "model", "N", "seed", "alpha", "kappa", "h", "beta",
    "delta", "lambda2", "db_residual", "stationarity_residual",
]
GAP_KEY_COLUMNS = 5
BOUND_HEADER = ["N", "beta", "h", "alpha", "bound", "tail_term", "sector0_term", "sector1_term"]
BOUND_KEY_COLUMNS = 4
SUMMARY_HEADER = ["model", "N", "alpha", "kappa", "h", "beta", "mean_delta", "std_err", "count"]
SUMMARY_KEY_COLUMNS = 4


def _load_instance_file(config: RunConfig) -> tuple[int, models.ClassicalHamiltonian]:
    path = Path(config.instance_file)
    if not path.exists():
        raise ConfigError(f"instance file {path} does not exist")
    try:
        record = json.loads(path.read_text())
        hamiltonian = models.instance_from_json(record)
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"{path}: bad instance record ({exc})") from None
    return int(record.get("seed", 0)), hamiltonian


def _scan_sizes(config: RunConfig) -> tuple[int, ...]:
    if config.instance_file:
        return (_load_instance_file(config)[1].n_sites,)
    return config.sizes


def _instance_list(config: RunConfig, n_sites: int) -> list[tuple[int, models.ClassicalHamiltonian]]:
    if config.instance_file:
        return [_load_instance_file(config)]
    if config.model == "ising":
        return [(0, models.IsingChain(n_sites))]
    spec = models.DisorderSpec(
        model=config.model, n_sites=n_sites, seed=config.seed, n_instances=config.instances
    )
    return [(spec.instance_seed(i), spec.instance(i)) for i in range(config.instances)]


def _model_tag(hamiltonian: models.ClassicalHamiltonian) -> str:
    return {
        models.IsingChain: "ising",
        models.SKInstance: "sk",
        models.ThreeSpinInstance: "3spin",
    }[type(hamiltonian)]


def _gap_rows_for_instance(args: tuple) -> list[tuple]:
    config, n_sites, seed, hamiltonian = args
    kappa = config.kappa_value()
    results = analysis.instance_gap_results(
        hamiltonian,
        config.beta,
        config.h,
        config.alphas,
        schedule_kind=config.schedule,
        kappa=kappa,
        steps_per_unit_time=config.steps_per_unit_time,
    )
    rows = []
    for alpha, result in zip(config.alphas, results):
        rows.append((
            _model_tag(hamiltonian), n_sites, seed, alpha, kappa, config.h, config.beta,
            result.delta, result.lambda2,
            result.detailed_balance_residual, result.stationarity_residual,
        ))
    return rows


def _map_instances(worker, units: list[tuple], n_workers: int):
    if n_workers > 1 and len(units) > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            yield from pool.map(worker, units)
    else:
        for unit in units:
            yield worker(unit)


def cmd_gap(config: RunConfig) -> int:
    """Exact gaps per (size, instance, ramp time) plus a peak summary."""
    config.validate(models.DEFAULT_MAX_SITES)
    out_dir = Path(config.output_dir)
    csv_path = out_dir / "gap_scan.csv"
    peaks = {}
    for n_sites in _scan_sizes(config):
        units = [
            (config, n_sites, seed, hamiltonian)
            for seed, hamiltonian in _instance_list(config, n_sites)
        ]
        collected: list[tuple] = []
        for rows in _map_instances(_gap_rows_for_instance, units, env_workers(config)):
            collected.extend(rows)
            write_csv(csv_path, GAP_HEADER, collected, config, GAP_KEY_COLUMNS)
        deltas = np.array([row[7] for row in collected]).reshape(len(units), len(config.alphas))
        means = deltas.mean(axis=0)
        best = int(np.argmax(means))
        peaks[str(n_sites)] = {
            "alpha_peak": config.alphas[best],
            "delta_peak": float(means[best]),
            "at_boundary": best in (0, len(config.alphas) - 1),
        }
    write_json(out_dir / "gap_summary.json", {"peaks": peaks}, config)
    logger.info("wrote %s", csv_path)
    return 0


def cmd_ising_bound(config: RunConfig) -> int:
    """Momentum-mode gap bound across sizes and ramp times."""
    config.validate(max_sites=10**6)  # the mode path has no state-space cap
    for n_sites in config.sizes:
        if n_sites % 2:
            raise ConfigError(f"ising-bound needs even sizes, got {n_sites}")
    out_dir = Path(config.output_dir)
    csv_path = out_dir / "ising_bound.csv"
    rows = []
    for n_sites in config.sizes:
        for alpha in config.alphas:
            schedule = models.RampSchedule(config.schedule, alpha)
            detail = freefermion.ising_bound_detail(
                n_sites, config.beta, config.h, schedule, config.mode_steps
            )
            rows.append((
                n_sites, config.beta, config.h, alpha,
                detail.bound, detail.tail_term,
                detail.sector_terms[0], detail.sector_terms[1],
            ))
        write_csv(csv_path, BOUND_HEADER, rows, config, BOUND_KEY_COLUMNS)
    logger.info("wrote %s", csv_path)
    return 0


def _completed_instances(rows_path: Path, config: RunConfig, n_sites: int) -> dict[int, dict]:
    """Per-instance alpha -> delta maps already present in a disorder CSV."""
    if not rows_path.exists():
        return {}
    meta, header, rows = read_csv(rows_path)
    if meta.get("config_hash") != config.config_hash():
        return {}
    decoded: dict[int, dict] = {}
    n_index, seed_index = header.index("N"), header.index("seed")
    alpha_index, delta_index = header.index("alpha"), header.index("delta")
    for row in rows:
        if int(float(row[n_index])) != n_sites:
            continue
        decoded.setdefault(int(row[seed_index]), {})[float(row[alpha_index])] = float(
            row[delta_index]
        )
    return decoded


def cmd_disorder(config: RunConfig) -> int:
    """Disorder-averaged gap curves: per-instance rows plus aggregates.

    Instances whose rows are already complete in the output (same
    configuration hash) are not recomputed, so interrupted sweeps resume
    where they stopped.
    """
    config.validate(models.DEFAULT_MAX_SITES)
    if config.model == "ising":
        raise ConfigError("disorder averaging needs a disordered model (sk or 3spin)")
    if config.instance_file:
        raise ConfigError("disorder averaging draws instances from seeds, not --instance-file")
    out_dir = Path(config.output_dir)
    rows_path = out_dir / "disorder.csv"
    summary_path = out_dir / "disorder_summary.csv"
    kappa = config.kappa_value()
    peaks = {}
    summary_rows = []
    for n_sites in config.sizes:
        spec = models.DisorderSpec(
            model=config.model, n_sites=n_sites, seed=config.seed, n_instances=config.instances
        )
        existing = _completed_instances(rows_path, config, n_sites)
        per_instance = np.full((config.instances, len(config.alphas)), np.nan)
        pending = []
        for i in range(config.instances):
            seed = spec.instance_seed(i)
            have = existing.get(seed, {})
            if all(alpha in have for alpha in config.alphas):
                per_instance[i] = [have[alpha] for alpha in config.alphas]
            else:
                pending.append(i)
        if pending:
            units = [
                (i, spec, config.beta, config.h, np.asarray(config.alphas),
                 config.schedule, kappa, config.steps_per_unit_time)
                for i in pending
            ]
            for index, gaps, message in _map_instances(
                analysis._instance_work_unit, units, env_workers(config)
            ):
                if gaps is None:
                    logger.warning("instance %d excluded: %s", index, message)
                    continue
                per_instance[index] = gaps
                seed = spec.instance_seed(index)
                rows = [
                    (config.model, n_sites, seed, float(alpha), kappa,
                     config.h, config.beta, float(delta))
                    for alpha, delta in zip(config.alphas, gaps)
                ]
                write_csv(rows_path, GAP_HEADER[:8], rows, config, GAP_KEY_COLUMNS)
        means, errs, counts = analysis.aggregate_instance_gaps(per_instance)
        for j, alpha in enumerate(config.alphas):
            summary_rows.append((
                config.model, n_sites, float(alpha), kappa, config.h, config.beta,
                float(means[j]), float(errs[j]), int(counts[j]),
            ))
        write_csv(summary_path, SUMMARY_HEADER, summary_rows, config, SUMMARY_KEY_COLUMNS)
        best = int(np.argmax(means))
        peaks[str(n_sites)] = {
            "alpha_peak": float(config.alphas[best]),
            "delta_peak": float(means[best]),
            "at_boundary": best in (0, len(config.alphas) - 1),
        }
        logger.info("model=%s N=%d done (%d computed, %d reused)",
                    config.model, n_sites, len(pending), config.instances - len(pending))
    write_json(out_dir / "disorder_summary.json", {"peaks": peaks}, config)
    logger.info("wrote %s and %s", rows_path, summary_path)
    return 0


def cmd_kappa(config: RunConfig) -> int:
    """Hold-duration scan at the gap-maximizing ramp time per instance."""
    config.validate(models.DEFAULT_MAX_SITES)
    out_dir = Path(config.output_dir)
    csv_path = out_dir / "kappa_scan.csv"
    kappas = np.logspace(
        math.log10(config.kappa_min), math.log10(config.kappa_max), config.kappa_points
    )
    rows = []
    for n_sites in _scan_sizes(config):
        for seed, hamiltonian in _instance_list(config, n_sites):
            gaps = analysis.instance_gaps(
                hamiltonian, config.beta, config.h, config.alphas,
                schedule_kind=config.schedule,
                steps_per_unit_time=config.steps_per_unit_time,
            )
            best_alpha = float(config.alphas[int(np.argmax(gaps))])
            scan = analysis.kappa_scan(
                hamiltonian, config.beta, config.h, best_alpha,
                kappas=kappas, schedule_kind=config.schedule,
                steps_per_unit_time=config.steps_per_unit_time,
            )
            for kappa, delta in zip(scan.kappas, scan.gaps):
                rows.append((_model_tag(hamiltonian), n_sites, seed, best_alpha, float(kappa),
                             config.h, config.beta, float(delta)))
            rows.append((_model_tag(hamiltonian), n_sites, seed, best_alpha, "avg",
                         config.h, config.beta, scan.mean_gap))
            rows.append((_model_tag(hamiltonian), n_sites, seed, best_alpha, "inf",
                         config.h, config.beta, scan.dephased_gap))
            write_csv(csv_path, GAP_HEADER[:8], rows, config, GAP_KEY_COLUMNS)
    logger.info("wrote %s", csv_path)
    return 0


def _column(header: list[str], rows: list[list[str]], name: str, path) -> np.ndarray:
    if name not in header:
        raise ConfigError(f"{path}: required column {name!r} is missing")
    index = header.index(name)
    try:
        return np.array([float(row[index]) for row in rows])
    except ValueError as exc:
        raise ConfigError(f"{path}: column {name!r} holds a non-numeric value ({exc})") from None


def cmd_fit(args) -> int:
    """Fit gap-vs-size scaling from a results CSV."""
    path = Path(args.input)
    if not path.exists():
        raise ConfigError(f"input file {path} does not exist")
    meta, header, rows = read_csv(path)
    require_schema(meta, path)
    if not rows:
        raise ConfigError(f"{path}: no data rows to fit")
    if "mean_delta" in header:
        rows = _select_summary_rows(header, rows, args.select, path)
        sizes = _column(header, rows, "N", path)
        gaps = _column(header, rows, "mean_delta", path)
        errors = _column(header, rows, "std_err", path)
    else:
        sizes = _column(header, rows, "N", path)
        gaps = _column(header, rows, "delta", path)
        errors = _column(header, rows, "sigma", path)
    fit = analysis.fit_scaling(sizes, gaps, errors, kind=args.kind)
    write_json(Path(args.output), {
        "kind": fit.kind,
        "exponent": fit.exponent,
        "err": fit.exponent_err,
        "chi2_nu": fit.chi2_nu,
        "points_used": fit.n_points,
        "input": str(path),
        "select": args.select,
    })
    print(json.dumps({"kind": fit.kind, "exponent": fit.exponent, "err": fit.exponent_err,
                      "chi2_nu": fit.chi2_nu, "points_used": fit.n_points}))
    return 0


def _select_summary_rows(header, rows, select, path):
    """Pick one (N, alpha) row per size from a disorder summary."""
    n_index = header.index("N")
    alpha_index = header.index("alpha")
    mean_index = header.index("mean_delta")
    by_size: dict[float, list[list[str]]] = {}
    for row in rows:
        by_size.setdefault(float(row[n_index]), []).append(row)
    chosen = []
    for size, group in sorted(by_size.items()):
        if select == "peak":
            chosen.append(max(group, key=lambda row: float(row[mean_index])))
        elif select == "quench":
            matches = [row for row in group if float(row[alpha_index]) == 0.0]
            if not matches:
                raise ConfigError(f"{path}: no alpha=0 row for N={size:g}")
            chosen.append(matches[0])
        elif select == "alpha-n":
            matches = [row for row in group if float(row[alpha_index]) == size]
            if not matches:
                raise ConfigError(f"{path}: no alpha=N row for N={size:g}")
            chosen.append(matches[0])
        else:
            raise ConfigError(f"unknown selection {select!r}")
    return chosen


def cmd_plot_data(args) -> int:
    """Validate a results CSV and re-emit it as a tidy JSON bundle."""
    path = Path(args.input)
    if not path.exists():
        raise ConfigError(f"input file {path} does not exist")
    meta, header, rows = read_csv(path)
    require_schema(meta, path)
    numeric_rows = []
    for row in rows:
        converted = []
        for value in row:
            try:
                converted.append(float(value))
            except ValueError:
                converted.append(value)
        numeric_rows.append(converted)
    write_json(Path(args.output), {
        "source": str(path),
        "meta": meta,
        "columns": header,
        "rows": numeric_rows,
    })
    return 0


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat key=value configuration file")
    parser.add_argument("--model", choices=["ising", "sk", "3spin"])
    parser.add_argument("--sizes", help="e.g. '6,8,10' or '8..32:4'")
    parser.add_argument("--beta")
    parser.add_argument("--h")
    parser.add_argument("--schedule", choices=["sin2", "linear"])
    parser.add_argument("--alphas", help="comma-separated ramp durations")
    parser.add_argument("--kappa", help="'inf', a number, or 'scan'")
    parser.add_argument("--kappa-points", dest="kappa_points")
    parser.add_argument("--kappa-min", dest="kappa_min")
    parser.add_argument("--kappa-max", dest="kappa_max")
    parser.add_argument("--instances")
    parser.add_argument("--seed")
    parser.add_argument("--steps", dest="steps_per_unit_time")
    parser.add_argument("--mode-steps", dest="mode_steps")
    parser.add_argument("--instance-file", dest="instance_file",
                        help="explicit instance JSON instead of seeded sampling")
    parser.add_argument("--output-dir", dest="output_dir")
    parser.add_argument("--workers")


def _config_from_args(args) -> RunConfig:
    file_values = parse_config_file(args.config) if args.config else {}
    override_keys = [
        "model", "sizes", "beta", "h", "schedule", "alphas", "kappa",
        "kappa_points", "kappa_min", "kappa_max", "instances", "seed",
        "steps_per_unit_time", "mode_steps", "instance_file", "output_dir", "workers",
    ]
    overrides = {key: getattr(args, key, None) for key in override_keys}
    return build_config(file_values, overrides)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rampmcmc",
        description="Gap analysis of Markov chains with ramped quantum proposals",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    for name, handler, description in (
        ("gap", cmd_gap, "exact spectral gaps across a ramp-time grid"),
        ("ising-bound", cmd_ising_bound, "momentum-mode gap bound for the periodic chain"),
        ("disorder", cmd_disorder, "disorder-averaged gap curves"),
        ("kappa", cmd_kappa, "hold-duration scan at the best ramp time"),
    ):
        sub = commands.add_parser(name, help=description)
        _add_config_flags(sub)
        sub.set_defaults(handler=lambda args, fn=handler: fn(_config_from_args(args)))

    fit = commands.add_parser("fit", help="fit gap-vs-size scaling from a CSV")
    fit.add_argument("--input", required=True)
    fit.add_argument("--output", default="fit.json")
    fit.add_argument("--kind", choices=["exponential", "power"], default="exponential")
    fit.add_argument("--select", choices=["peak", "quench", "alpha-n"], default="peak")
    fit.set_defaults(handler=cmd_fit)

    plot = commands.add_parser("plot-data", help="validate a CSV and emit a JSON bundle")
    plot.add_argument("--input", required=True)
    plot.add_argument("--output", required=True)
    plot.set_defaults(handler=cmd_plot_data)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - surface numerical failures as exit 3
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
