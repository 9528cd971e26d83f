"""Command-line front end.

Subcommands ``bounds``, ``simulate``, ``sweep``, ``dp`` and ``verify`` all
write CSV (header first, numbers to 9 significant digits). Configuration is
layered: defaults, then ``--preset``, then ``--config``, then ``--set`` and
the dedicated flags. Exit codes: 0 success, 1 verification failure,
2 invalid input.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from dataclasses import replace

from .bounds import BoundReport, bound_report
from .config import ConfigError, ExperimentConfig, parse_pairs, preset
from .core import DomainError
from .policies import FixedFractionPolicy, GreedyPolicy, TablePolicy, dp_optimal_policy
from .sim import monte_carlo, sweep_battery

EXIT_OK, EXIT_VERIFY_FAILED, EXIT_BAD_INPUT = 0, 1, 2

SIMULATE_COLUMNS = ("policy", "B", "epsilon", "mean", "std_error", "ci95")
SWEEP_COLUMNS = ("B", "lower_bound", "ffp_mean", "ffp_ci95", "dp_gain", "gap_ffp_lower", "gap_ffp_dp")


def _cell(x) -> str:
    if isinstance(x, str):
        return x
    return f"{float(x):.9g}"


def write_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(x) for x in row])
    return buf.getvalue()


# ------------------------------------------------------------------ commands


def cmd_bounds(cfg: ExperimentConfig) -> str:
    rows = []
    for B in cfg.batteries:
        params = cfg.params.with_capacity(B)
        model = cfg.model(B)
        rows.append(bound_report(model.fraction(B), params, cfg.tail_tol).csv_row())
    return write_csv(BoundReport.CSV_COLUMNS, rows)


def _policy(name: str, cfg: ExperimentConfig, model, params):
    if name == "ffp":
        return FixedFractionPolicy.for_model(model, params)
    if name == "greedy":
        return GreedyPolicy(params)
    table = dp_optimal_policy(model, params, cfg.grid_size, cfg.span_tol)
    return TablePolicy(table, params)


def cmd_simulate(cfg: ExperimentConfig) -> str:
    rows = []
    for B in cfg.batteries:
        params = cfg.params.with_capacity(B)
        model = cfg.model(B)
        for name in cfg.policies:
            res = monte_carlo(_policy(name, cfg, model, params), model, params, cfg.sim, cfg.workers)
            rows.append([name, B, params.sampling_cost, res.mean_distortion, res.std_error,
                         res.ci95_halfwidth])
    return write_csv(SIMULATE_COLUMNS, rows)


def cmd_sweep(cfg: ExperimentConfig) -> str:
    if not cfg.B_values:
        raise ConfigError("B_values", "sweep needs a list of battery sizes")
    with_dp = "dp" in cfg.policies
    sweep = sweep_battery(
        lambda model, params: FixedFractionPolicy.for_model(model, params),
        cfg.model, cfg.params, cfg.B_values, cfg.sim, cfg.workers,
    )
    header = [c for c in SWEEP_COLUMNS if with_dp or c not in ("dp_gain", "gap_ffp_dp")]
    rows = []
    for row in sweep:
        ffp = row.result.mean_distortion
        values = {
            "B": row.battery_capacity,
            "lower_bound": row.bounds.lower,
            "ffp_mean": ffp,
            "ffp_ci95": row.result.ci95_halfwidth,
            "gap_ffp_lower": ffp - row.bounds.lower,
        }
        if with_dp:
            table = dp_optimal_policy(cfg.model(row.battery_capacity), row.params,
                                      cfg.grid_size, cfg.span_tol)
            values["dp_gain"] = table.gain
            values["gap_ffp_dp"] = ffp - table.gain
        rows.append([values[c] for c in header])
    return write_csv(header, rows)


def cmd_dp(cfg: ExperimentConfig) -> tuple[str, str]:
    params = cfg.params
    table = dp_optimal_policy(cfg.model(params.battery_capacity), params, cfg.grid_size, cfg.span_tol)
    note = (f"gain={table.gain:.9g} span={table.span:.3g} iterations={table.iterations} "
            f"B={params.battery_capacity:.9g} epsilon={params.sampling_cost:.9g}")
    return table.to_csv(), note


def cmd_verify(cfg: ExperimentConfig) -> tuple[str, bool]:
    from .verify import run_all

    results = run_all(cfg)
    text = "\n".join(r.line() for r in results) + "\n"
    return text, all(r.passed for r in results)


# ------------------------------------------------------------------ plumbing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ffpower", description=__doc__.split("\n\n")[0])
    parser.add_argument("command", choices=("bounds", "simulate", "sweep", "dp", "verify"))
    parser.add_argument("--config", metavar="PATH", help="flat key = value config file")
    parser.add_argument("--preset", metavar="NAME", help="fig1 or fig2")
    parser.add_argument("--seed", type=int, metavar="U64")
    parser.add_argument("--out", metavar="PATH", help="output file ('-' for stdout)")
    parser.add_argument("--format", choices=("csv",))
    parser.add_argument("--workers", type=int)
    parser.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override any config key; repeatable")
    parser.add_argument("--print-config", action="store_true",
                        help="print the resolved config and exit")
    return parser


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    cfg = preset(args.preset) if args.preset else ExperimentConfig()
    if args.config:
        try:
            with open(args.config) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError("config", str(exc)) from None
        cfg = ExperimentConfig.parse(text, cfg)
    cfg = ExperimentConfig.from_mapping(parse_pairs(args.set), cfg)
    flags = {k: getattr(args, k) for k in ("seed", "out", "format", "workers")}
    cfg = replace(cfg, **{k: v for k, v in flags.items() if v is not None})
    return cfg.validate()


def _emit(text: str, out: str) -> None:
    if out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
    except ConfigError as exc:
        print(f"ffpower: invalid config: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    if args.print_config:
        sys.stdout.write(cfg.to_text())
        return EXIT_OK
    try:
        if args.command == "bounds":
            _emit(cmd_bounds(cfg), cfg.out)
        elif args.command == "simulate":
            _emit(cmd_simulate(cfg), cfg.out)
        elif args.command == "sweep":
            _emit(cmd_sweep(cfg), cfg.out)
        elif args.command == "dp":
            text, note = cmd_dp(cfg)
            _emit(text, cfg.out)
            print(note, file=sys.stderr)
        else:
            text, ok = cmd_verify(cfg)
            _emit(text, cfg.out)
            return EXIT_OK if ok else EXIT_VERIFY_FAILED
    except (ConfigError, DomainError) as exc:
        print(f"ffpower: invalid input: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except OSError as exc:
        print(f"ffpower: cannot write output: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
