"""Command-line driver.

Subcommands: validate, simulate, limit, compare, regulator.  All results go
to --out as machine-readable JSON plus plot-ready CSV (UTF-8, header row,
'.' decimal separator).  Exit codes: 0 success, 1 validation/config
failure, 2 runtime error.  HEAVYQ_THREADS sets the default replication
thread count.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import randomness
from .config import ConfigError, load_config, load_plan
from .harness import run_experiment_detailed, validate_assumptions
from .hazards import hazard_from_config
from .regulator import PathRecord, apply_regulator, drain_check
from .simulator import run_replication, write_samples_csv


def _threads(args) -> int:
    if args.threads is not None:
        return args.threads
    return int(os.environ.get("HEAVYQ_THREADS", "1"))


def _say(args, msg: str) -> None:
    if not args.quiet:
        print(msg)


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_validate(args) -> int:
    plan = load_plan(args.config, seed_override=args.seed)
    report = validate_assumptions(plan)
    for line in report.lines():
        print(line)
    return 0 if report.passed else 1


def cmd_simulate(args) -> int:
    plan = load_plan(args.config, seed_override=args.seed)
    n = args.n if args.n is not None else plan.n_sequence[0]
    lane = plan.n_sequence.index(n) if n in plan.n_sequence else 0
    cfg = plan.config_for(n)
    out = _outdir(args)
    horizon = plan.horizon_per_n * n
    burn_in = plan.burn_in_per_n * n
    pooled = []
    for rep in range(plan.replications):
        seed = randomness.replication_seed(plan.seed_root, lane, rep)
        res = run_replication(
            cfg, horizon, burn_in, seed,
            moment_orders=plan.moment_orders,
            batches=plan.batches,
            max_samples=plan.max_samples_per_rep,
        )
        pooled.append(res.scaled_wait_samples)
        path = out / f"sim_n{n}_rep{rep}.json"
        path.write_text(json.dumps(res.to_json_dict(), indent=2, sort_keys=True))
        _say(args, f"replication {rep}: mean scaled wait "
             f"{res.scaled_wait_moment[1.0][0]:.6f} -> {path}")
    write_samples_csv(out / f"samples_n{n}.csv", np.concatenate(pooled))
    _say(args, f"wrote {out / f'samples_n{n}.csv'}")
    return 0


def cmd_limit(args) -> int:
    from .diffusion import abandonment_limit, stationary_density

    plan = load_plan(args.config, seed_override=args.seed)
    out = _outdir(args)
    spec = plan.diffusion_spec()
    law = stationary_density(spec, moment_orders=plan.moment_orders)
    law.write_csv(out / "law.csv")
    summary = law.moment_summary()
    summary["mean"] = law.moment(1.0)
    summary["abandonment_limit"] = abandonment_limit(spec, law)
    summary["lambda_mean"] = plan.lam * law.moment(1.0)
    (out / "limit.json").write_text(json.dumps(summary, indent=2, sort_keys=True))
    _say(args, f"limit mean {summary['mean']:.6f} -> {out / 'limit.json'}")
    return 0


def cmd_compare(args) -> int:
    plan = load_plan(args.config, seed_override=args.seed)
    out = _outdir(args)
    result = run_experiment_detailed(plan, threads=_threads(args))
    report = result.report
    (out / "report.json").write_text(json.dumps(report.to_json_dict(), indent=2, sort_keys=True))
    result.law.write_csv(out / "law.csv")
    for n, samples in result.samples_by_n.items():
        write_samples_csv(out / f"samples_n{n}.csv", samples)
    with open(out / "table.csv", "w", newline="") as fh:
        fh.write("n,ks,metric,estimate,ci_halfwidth,limit,error\n")
        for n, d in sorted(report.per_n.items()):
            for m in sorted(d.moment_estimates):
                est, hw = d.moment_estimates[m]
                fh.write(
                    f"{n},{d.ks_to_limit!r},moment_{m!r},{est!r},{hw!r},"
                    f"{report.limit.moments[m]!r},{d.moment_errors[m]!r}\n"
                )
            est, hw = d.abandon_scaled
            fh.write(
                f"{n},{d.ks_to_limit!r},abandon_scaled,{est!r},{hw!r},"
                f"{report.limit.abandonment_limit!r},{d.abandon_limit_error!r}\n"
            )
            est, hw = d.queue_scaled
            fh.write(
                f"{n},{d.ks_to_limit!r},queue_scaled,{est!r},{hw!r},"
                f"{report.limit.lambda_mean!r},{d.queue_limit_error!r}\n"
            )
    _say(args, f"wrote {out / 'report.json'} and per-n tables")
    return 0


def cmd_regulator(args) -> int:
    data = load_config(args.config)
    section = data.get("regulator")
    if section is None:
        raise ConfigError("config has no 'regulator' section")
    h = hazard_from_config(section["hazard"])
    dt = float(section.get("dt", 1e-3))
    out = _outdir(args)
    summary = {}
    if args.path is not None:
        y = PathRecord.read_csv(args.path, interpolation=section.get("interpolation", "linear"))
    elif "ramp" in section:
        ramp = section["ramp"]
        t_end = float(ramp["t_end"])
        y = PathRecord(
            np.array([0.0, t_end]),
            np.array([float(ramp["x"]), float(ramp["x"]) + float(ramp["b"]) * t_end]),
        )
    else:
        raise ConfigError("regulator needs --path or a 'ramp' config entry")
    pair = apply_regulator(y, h, dt)
    pair.z.write_csv(out / "z.csv")
    pair.l.write_csv(out / "l.csv")
    summary["residual"] = pair.residual
    summary["l_end"] = float(pair.l.values[-1])
    if "drain" in section:
        drain = section["drain"]
        drain_h = hazard_from_config(drain["hazard"]) if "hazard" in drain else h
        res = drain_check(
            [float(x) for x in drain["x_grid"]],
            float(drain["b"]),
            drain_h,
            dt,
            delta=float(drain["delta"]),
        )
        summary["drain"] = {
            "d_hat": res.d_hat,
            "passed": res.passed,
            "hit_times": {repr(k): v for k, v in res.hit_times.items()},
        }
    (out / "regulator.json").write_text(json.dumps(summary, indent=2, sort_keys=True))
    _say(args, f"regulator residual {summary['residual']:.3e} -> {out / 'regulator.json'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="heavyq",
        description="Single-server queue with abandonment: simulation vs diffusion limits",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (
        ("validate", cmd_validate),
        ("simulate", cmd_simulate),
        ("limit", cmd_limit),
        ("compare", cmd_compare),
        ("regulator", cmd_regulator),
    ):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="experiment config file (JSON)")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override the config seed root")
        p.add_argument("--threads", type=int, default=None, help="replication threads")
        p.add_argument("--quiet", action="store_true")
        p.add_argument("--verbose", action="store_true")
        p.set_defaults(fn=fn)
    sub.choices["simulate"].add_argument("--n", type=int, default=None, help="system index to simulate")
    sub.choices["regulator"].add_argument("--path", default=None, help="two-column CSV input path")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - runtime failures map to exit 2
        print(f"runtime error in '{args.command}': {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
