"""Command-line interface.

Subcommands: ``simulate``, ``blocks``, ``bootstrap``, ``clt-check``,
``bounds-check``, ``coupling-check``, ``window``.  All but ``window`` read a
JSON config file (``--config``); ``--seed`` overrides the configured seed and
``--threads`` the worker count (speed only, never results).

Exit codes: 0 success; 1 invalid config; 2 hypothesis violation (degenerate
statistics); 3 resource cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .blocks import (
    RegenerationDecomposition,
    block_statistics,
    write_decomposition_csv,
)
from .bootstrap import bootstrap_distribution, write_statistics_csv
from .errors import ConfigError, DegenerateSampleError, RegenbootError, ResourceCapError
from .harness import (
    ExperimentConfig,
    TAG_TRAJECTORY,
    _decomposition_sampler,
    _default_initial_length,
    clt_experiment,
    coupling_check,
    grow_until_returns,
    mean_scaling_check,
    tail_and_moment_check,
    write_bound_rows_csv,
    write_scaling_rows_csv,
    write_trajectory_csv,
)
from .rng import SeedSpec
from .schedule import admissibility_window

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_HYPOTHESIS = 2
EXIT_RESOURCE = 3


def _load_config(args) -> ExperimentConfig:
    path = Path(args.config)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from exc
    if getattr(args, "seed", None) is not None:
        raw["seed"] = args.seed
    if getattr(args, "threads", None) is not None:
        raw["threads"] = args.threads
    return ExperimentConfig.from_dict(raw)


def _sibling(path: str, tag: str) -> str:
    p = Path(path)
    return str(p.with_name(p.stem + f".{tag}" + p.suffix))


def _grown_decomposition(config: ExperimentConfig):
    seed = SeedSpec(config.seed)
    sampler, exact_mean, kernel, f = _decomposition_sampler(config, seed.child(TAG_TRAJECTORY))
    m = config.resolved_block_count()
    initial = config.initial_length
    if initial is None:
        initial = _default_initial_length(m, config.k, kernel.alphabet_size, config.trajectory_cap)
    trajectory, rt = grow_until_returns(sampler, config.k, m, initial, config.trajectory_cap)
    return trajectory, rt, exact_mean, f, seed


def _cmd_simulate(args) -> int:
    config = _load_config(args)
    seed = SeedSpec(config.seed)
    sampler, _, _, _ = _decomposition_sampler(config, seed.child(TAG_TRAJECTORY))
    n = config.n if config.n is not None else 10**5
    trajectory = sampler(n)
    if config.output_csv:
        write_trajectory_csv(config.output_csv, trajectory)
        print(f"wrote {trajectory.size} symbols to {config.output_csv}")
    else:
        print(f"simulated {trajectory.size} symbols (no output.csv configured)")
    return EXIT_OK


def _cmd_blocks(args) -> int:
    config = _load_config(args)
    trajectory, rt, exact_mean, f, _ = _grown_decomposition(config)
    decomposition = RegenerationDecomposition.from_trajectory(trajectory, config.k, len(rt) - 1)
    stats = block_statistics(decomposition.blocks, f, mu=exact_mean)
    if config.output_csv:
        write_decomposition_csv(config.output_csv, decomposition, stats)
        print(f"wrote {len(decomposition.blocks)} blocks to {config.output_csv}")
    else:
        print(f"decomposed into {len(decomposition.blocks)} blocks (no output.csv configured)")
    return EXIT_OK


def _cmd_bootstrap(args) -> int:
    config = _load_config(args)
    trajectory, rt, exact_mean, f, seed = _grown_decomposition(config)
    from .blocks import extract_blocks
    from .harness import TAG_BOOTSTRAP

    blocks = extract_blocks(trajectory, rt)
    stats = block_statistics(blocks, f, mu=exact_mean)
    sample = bootstrap_distribution(
        blocks,
        stats.centered_sums,
        config.bootstrap_replicates,
        seed.child(TAG_BOOTSTRAP),
        f,
        threads=config.threads,
    )
    if config.output_csv:
        write_statistics_csv(config.output_csv, sample)
        print(f"wrote {sample.size} statistics to {config.output_csv}")
    else:
        print(f"drew {sample.size} bootstrap statistics (no output.csv configured)")
    return EXIT_OK


def _cmd_clt_check(args) -> int:
    config = _load_config(args)
    report, sample = clt_experiment(config)
    if config.output_csv:
        write_statistics_csv(config.output_csv, sample)
    if config.output_json:
        Path(config.output_json).write_text(report.to_json())
    s = report.statistics
    w = report.window
    print(
        f"mode={report.mode} k={report.k} m={report.m} alpha={report.alpha:.6g} "
        f"B={s['count']} trajectory={report.trajectory_length}"
    )
    print(
        f"window=({w['lower']:.6g}, {w['upper']:.6g}) strong_mixing_ok={w['strong_mixing_ok']} "
        f"alpha_in_window={w['contains_alpha']}"
    )
    if not w["contains_alpha"]:
        print("note: alpha outside the certified window; the check is still a valid experiment")
    print(
        f"statistics: mean={s['mean']:.5f} sd={s['sd']:.5f} skewness={s['skewness']:.5f} "
        f"ks={s['ks_distance']:.5f} (threshold {report.ks_threshold}) "
        f"-> {'PASS' if report.ks_pass else 'FAIL'}"
    )
    d = report.diagnostics
    centering = "none" if d["centering_ratio"] is None else f"{d['centering_ratio']:.6g}"
    print(f"diagnostics: lindeberg_ratio={d['lindeberg_ratio']:.6g} centering_ratio={centering}")
    print(f"wall_clock={report.wall_clock_seconds:.2f}s")
    return EXIT_OK


def _cmd_bounds_check(args) -> int:
    config = _load_config(args)
    result = tail_and_moment_check(config)
    if config.output_csv:
        write_bound_rows_csv(config.output_csv, result["tail_rows"])
        write_bound_rows_csv(_sibling(config.output_csv, "moments"), result["moment_rows"])
    scaling = None
    if args.with_scaling:
        scaling = mean_scaling_check(config)
        if config.output_csv:
            write_scaling_rows_csv(_sibling(config.output_csv, "scaling"), scaling["rows"])
    print(f"blocks={result['blocks']} delta={result['delta']:.6g} k={result['k']}")
    for row in result["tail_rows"]:
        print(
            f"tail t={row['t']:>3}: empirical={row['empirical']:.6g} se={row['se']:.3g} "
            f"bound={row['bound']:.6g} violation={row['violation']}"
        )
    for row in result["moment_rows"]:
        print(
            f"moment r={row['t']}: empirical={row['empirical']:.6g} se={row['se']:.3g} "
            f"bound={row['bound']:.6g} violation={row['violation']}"
        )
    if scaling is not None:
        for row in scaling["rows"]:
            print(f"scaling m={row['m']}: m*mse={row['scaled_mse']:.6g} se={row['se']:.3g}")
    print("violations detected" if result["any_violation"] else "all bounds hold within 4 SE")
    return EXIT_OK


def _cmd_coupling_check(args) -> int:
    config = _load_config(args)
    result = coupling_check(config)
    if config.output_csv:
        write_bound_rows_csv(config.output_csv, result["single_rows"])
        write_bound_rows_csv(_sibling(config.output_csv, "horizon"), result["window_rows"])
    print(f"steps={result['steps']} horizon={result['horizon']}")
    for row in result["single_rows"]:
        print(
            f"single k={row['t']}: rate={row['empirical']:.6g} se={row['se']:.3g} "
            f"bound={row['bound']:.6g} violation={row['violation']}"
        )
    for row in result["window_rows"]:
        print(
            f"horizon k={row['t']}: rate={row['empirical']:.6g} se={row['se']:.3g} "
            f"reference={row['bound']:.6g} violation={row['violation']}"
        )
    print("violations detected" if result["any_violation"] else "all bounds hold within 4 SE")
    return EXIT_OK


def _cmd_window(args) -> int:
    delta_inf = args.delta_inf if args.delta_inf is not None else args.delta
    c = float("inf") if args.c is None else args.c
    try:
        window = admissibility_window(args.delta, c, delta_inf)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    print(f"lower={window.lower:.5f}")
    print(f"upper={window.upper:.5f}")
    print(f"nonempty={window.nonempty}")
    print(f"strong_mixing_ok={window.strong_mixing_ok}")
    print(f"markov_lower={window.markov_lower:.5f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="regenboot",
        description="Regeneration-block bootstrap experiments on finite-alphabet chains",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config_command(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="path to the JSON experiment config")
        p.add_argument("--seed", type=int, default=None, help="override the configured seed")
        p.add_argument(
            "--threads", type=int, default=None, help="worker threads (speed only, never results)"
        )
        p.set_defaults(func=func)
        return p

    add_config_command("simulate", _cmd_simulate, "sample a trajectory and write it as CSV")
    add_config_command("blocks", _cmd_blocks, "decompose a trajectory into excursion blocks")
    add_config_command("bootstrap", _cmd_bootstrap, "draw bootstrap statistics from one sample")
    add_config_command("clt-check", _cmd_clt_check, "full normality check of the bootstrap statistic")
    bounds = add_config_command("bounds-check", _cmd_bounds_check, "block-length tail/moment bounds")
    bounds.add_argument(
        "--with-scaling", action="store_true", help="also run the mean scaled-error grid"
    )
    add_config_command("coupling-check", _cmd_coupling_check, "coupling discrepancy vs continuity rates")

    w = sub.add_parser("window", help="print the admissible schedule-exponent window")
    w.add_argument("--delta", type=float, required=True, help="uniform conditional probability floor")
    w.add_argument("--c", type=float, default=None, help="mixing exponent (omit for finite order)")
    w.add_argument(
        "--delta-inf", dest="delta_inf", type=float, default=None,
        help="uniform floor across the approximation sequence (defaults to --delta)",
    )
    w.set_defaults(func=_cmd_window)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DegenerateSampleError as exc:
        print(f"hypothesis violation: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except ResourceCapError as exc:
        print(f"resource cap exceeded: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except RegenbootError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
