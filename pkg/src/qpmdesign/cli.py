"""Command-line interface: design, sweep, bench, oracle.

design   run the hybrid optimizer on a config, write pattern + trace
sweep    evaluate a stored pattern across pump wavelengths
bench    repeated-trial statistics, algorithm comparison, timing tables
oracle   exhaustive search of every pattern (small N only)

All outputs are reproducible byte for byte from (config, seed).
"""

import argparse
import dataclasses
import os
import sys

import numpy as np

from . import bench, formats, optimizer
from .config import ConfigError, load_config, write_resolved
from .physics import DomainPattern, sweep_spectrum


def _add_common(parser):
    parser.add_argument("--config", required=True, help="path to a key=value config file")
    parser.add_argument("--out", help="output directory (default: config output_dir)")


def _out_dir(cfg, args) -> str:
    return formats.ensure_dir(args.out if args.out else cfg.output_dir)


def _cmd_design(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    if args.workers is not None:
        cfg = dataclasses.replace(cfg, workers=args.workers)
    out = _out_dir(cfg, args)
    write_resolved(cfg, out)

    result = bench.run_scenario(cfg, "hybrid")
    pattern = DomainPattern(cfg.domain_thickness_um, result.best.projection)
    formats.write_pattern(pattern, os.path.join(out, "pattern.txt"))
    formats.write_grayscale(pattern, os.path.join(out, "pattern.pgm"),
                            row_height=args.grayscale_height)
    formats.write_csv(os.path.join(out, "convergence.csv"),
                      formats.CONVERGENCE_HEADER, result.trace)
    print(f"design: N={cfg.n_domains} best_fitness={result.best.fitness:.12g} -> {out}")
    return 0


def _cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    pattern = formats.read_pattern(args.pattern)
    if args.wavelengths_nm:
        wavelengths = [float(w) for w in args.wavelengths_nm.split(",") if w.strip()]
    else:
        if args.points < 1:
            raise ConfigError("--points must be >= 1")
        wavelengths = list(np.linspace(args.start_nm, args.stop_nm, args.points))
    process = "shg" if cfg.process.endswith("shg") else "thg"
    rows = sweep_spectrum(pattern, cfg.mismatch_provider(), wavelengths, process)
    out_path = args.out or os.path.join(formats.ensure_dir(cfg.output_dir), "spectrum.csv")
    formats.write_csv(out_path, formats.SPECTRUM_HEADER, rows)
    print(f"sweep: {len(rows)} wavelengths -> {out_path}")
    return 0


def _cmd_bench(args) -> int:
    cfg = load_config(args.config)
    out = _out_dir(cfg, args)
    write_resolved(cfg, out)
    wrote = []

    if args.timing:
        workers_list = [int(w) for w in args.workers_list.split(",") if w.strip()]
        report = bench.speedup_report(workers_list, rows=args.timing_rows,
                                      n=args.timing_domains,
                                      repetitions=args.repetitions)
        path = os.path.join(out, "timing.csv")
        formats.write_csv(path, formats.TIMING_HEADER, report.rows)
        wrote.append(path)

    if args.backends:
        rows = bench.backend_benchmark(repetitions=args.repetitions)
        path = os.path.join(out, "backends.csv")
        formats.write_csv(path, formats.BACKEND_HEADER, rows)
        wrote.append(path)

    if not (args.timing or args.backends) or args.compare:
        algorithms = [a.strip() for a in args.algorithms.split(",") if a.strip()]
        for algorithm in algorithms:
            if algorithm not in optimizer.ALGORITHMS:
                raise ConfigError(
                    f"unknown algorithm {algorithm!r}; choose from {optimizer.ALGORITHMS}"
                )
        summary_rows = []
        for algorithm in algorithms:
            stats, records = bench.run_trials(cfg, algorithm, args.trials,
                                              args.base_seed)
            summary_rows.append(stats.as_row())
            trial_path = os.path.join(out, f"trials_{algorithm}.csv")
            formats.write_csv(trial_path, formats.TRIAL_HEADER,
                              [r.as_row() for r in records])
            wrote.append(trial_path)
        path = os.path.join(out, "bench_summary.csv")
        formats.write_csv(path, formats.BENCH_HEADER, summary_rows)
        wrote.append(path)

    print("bench: wrote " + ", ".join(wrote))
    return 0


def _cmd_oracle(args) -> int:
    cfg = load_config(args.config)
    if args.n is not None:
        # shrink/grow the crystal to n domains at the configured thickness
        cfg = dataclasses.replace(
            cfg, crystal_length_um=args.n * cfg.domain_thickness_um)
    out = _out_dir(cfg, args)
    write_resolved(cfg, out)
    objective = bench.build_objective(cfg)
    n = cfg.n_domains
    signs, best_fitness = bench.brute_force_oracle(objective, n)
    pattern = DomainPattern(cfg.domain_thickness_um, signs)
    formats.write_pattern(pattern, os.path.join(out, "oracle_pattern.txt"))
    formats.write_csv(os.path.join(out, "oracle.csv"),
                      ("n", "evaluations", "best_fitness"),
                      [(n, 1 << n, best_fitness)])
    print(f"oracle: N={n} best_fitness={best_fitness:.12g} -> {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qpmdesign",
        description="Aperiodic poling design by hybrid DE / grey-wolf search",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("design", help="optimize a domain pattern")
    _add_common(p)
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--workers", type=int, help="override the config worker count")
    p.add_argument("--grayscale-height", type=int, default=32,
                   help="pixel height of pattern.pgm rows (default 32)")
    p.set_defaults(func=_cmd_design)

    p = sub.add_parser("sweep", help="spectrum of a stored pattern")
    _add_common(p)
    p.add_argument("--pattern", required=True, help="pattern file to evaluate")
    p.add_argument("--start-nm", type=float, help="sweep start wavelength")
    p.add_argument("--stop-nm", type=float, help="sweep stop wavelength")
    p.add_argument("--points", type=int, default=41, help="sweep point count")
    p.add_argument("--wavelengths-nm", help="explicit comma-separated wavelengths")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("bench", help="trial statistics and benchmarks")
    _add_common(p)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--base-seed", type=int, default=0)
    p.add_argument("--algorithms", default="hybrid,de,gwo")
    p.add_argument("--compare", action="store_true",
                   help="force the comparison table even with --timing/--backends")
    p.add_argument("--timing", action="store_true",
                   help="measure batch evaluation time per worker count")
    p.add_argument("--workers-list", default="1,2,4,8")
    p.add_argument("--timing-rows", type=int, default=5000)
    p.add_argument("--timing-domains", type=int, default=660)
    p.add_argument("--repetitions", type=int, default=5)
    p.add_argument("--backends", action="store_true",
                   help="compare the numba and numpy kernel backends")
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("oracle", help="exhaustive search (N <= 20)")
    _add_common(p)
    p.add_argument("--n", type=int,
                   help="override the domain count (keeps the configured thickness)")
    p.set_defaults(func=_cmd_oracle)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "sweep" and not args.wavelengths_nm:
        if args.start_nm is None or args.stop_nm is None:
            parser.error("sweep needs --start-nm/--stop-nm or --wavelengths-nm")
    try:
        return args.func(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
