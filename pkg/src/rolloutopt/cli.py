"""Command line entry point.

Usage::

    rolloutopt <command> --config run.json [--out DIR] [--seed N]
               [--grid-step H] [--allow-cap]

Commands: classify, optimize, simulate, estimate, sweep-rate.

Exit codes: 0 success, 2 config error, 3 domain/parameter error, 4 the best
schedule hit the step-count cap (pass ``--allow-cap`` to accept it).
``classify`` instead reports the class: 0 LogConcave, 10 LogConvex,
11 DiscontinuousLogConcaveTail, 12 Neither.
"""

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from . import config as C
from .adaptation import avg_rate, invert_rate, is_inelastic
from .arum import ArumSpec
from .exceptions import RolloutError
from .optimizer import Schedule, optimize, optimize_sweep
from .retention import classify_curvature, survival_s
from .simulator import CohortConfig, estimate_p, simulate_schedule

logger = logging.getLogger("rolloutopt")

EXIT_OK, EXIT_CONFIG, EXIT_DOMAIN, EXIT_CAPPED = 0, 2, 3, 4
CLASS_EXIT = {
    "LogConcave": 0,
    "LogConvex": 10,
    "DiscontinuousLogConcaveTail": 11,
    "Neither": 12,
}


class ConfigError(Exception):
    pass


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".9g")


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def write_doc(path, doc):
    path.write_text(doc.model_dump_json(indent=2) + "\n")


def load_config(path):
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        return C.RunConfig.model_validate(raw)
    except ValidationError as exc:
        err = exc.errors()[0]
        where = ".".join(str(p) for p in err["loc"]) or "<root>"
        raise ConfigError(f"config field '{where}': {err['msg']}") from exc


def apply_overrides(cfg, args):
    if args.seed is not None:
        if not 0 <= args.seed <= C.U64_MAX:
            raise ConfigError("--seed must be an unsigned 64-bit integer")
        cfg = cfg.model_copy(update={"simulation": cfg.simulation.model_copy(update={"seed": args.seed})})
    if args.grid_step is not None:
        if not args.grid_step > 0:
            raise ConfigError("--grid-step must be > 0")
        if cfg.grid is not None:
            cfg = cfg.model_copy(update={"grid": cfg.grid.model_copy(update={"step": args.grid_step})})
    return cfg


class _Run:
    def __init__(self, cfg, args):
        self.cfg = cfg
        self.args = args
        self.out = Path(args.out or cfg.output.dir)
        self.formats = set(cfg.output.formats)
        self.out.mkdir(parents=True, exist_ok=True)

    def doc(self, name, doc):
        if "json" in self.formats:
            write_doc(self.out / name, doc)
        print(doc.model_dump_json())

    def table(self, name, header, rows):
        if "csv" in self.formats:
            write_csv(self.out / name, header, rows)


def _optimize_doc(result, grid_size):
    return C.OptimizeDoc(
        x=result.best.x,
        z=result.best.z,
        A=result.best.A,
        value=result.value,
        one_step_shortcut_used=result.one_step_shortcut_used,
        grid_size=grid_size,
        n_capped=result.n_capped,
        best_capped=result.best_capped,
    )


def _trace_rows(result):
    return [(r.x, r.z_star, r.A, r.pi) for r in result.sweep_trace]


def cmd_classify(run):
    curve = C.build_curve(run.cfg)
    cls = classify_curvature(curve)
    run.doc(
        "classify.json",
        C.ClassifyDoc(
            curvature=cls.kind.value,
            evidence=cls.evidence,
            max_second_diff=cls.max_second_diff,
            min_second_diff=cls.min_second_diff,
            worst_x=cls.worst_x,
            jump_at_zero=cls.jump_at_zero,
        ),
    )
    return CLASS_EXIT[cls.kind.value]


def _run_optimize(run, curve, dispatch=True):
    grid = C.build_grid(run.cfg, curve, run.args.grid_step)
    rev = C.build_revenue(run.cfg)
    solve = optimize if dispatch else optimize_sweep
    result = solve(curve, rev, grid, z_max=run.cfg.z_max, n_jobs=run.cfg.simulation.n_jobs)
    run.table("trace.csv", ["x", "z_star", "A", "pi"], _trace_rows(result))
    return result, _optimize_doc(result, len(grid))


def _cap_status(run, result):
    if result.best_capped and not run.args.allow_cap:
        logger.error("best schedule hit z_max=%d; rerun with --allow-cap to accept", run.cfg.z_max)
        return EXIT_CAPPED
    return EXIT_OK


def cmd_optimize(run):
    result, doc = _run_optimize(run, C.build_curve(run.cfg))
    run.doc("optimize.json", doc)
    return _cap_status(run, result)


def _model(cfg):
    return C.build_arum(cfg.arum) if cfg.arum is not None else C.build_curve(cfg)


def cmd_simulate(run):
    cfg = run.cfg
    if cfg.simulation.n_users == 0:
        raise RolloutError("simulation.n_users must be > 0")
    if cfg.schedule is None:
        raise RolloutError("simulate needs a 'schedule' section")
    sched = cfg.schedule
    schedule = Schedule(sched.x, sched.z) if sched.increments is None else list(sched.increments)
    model = _model(cfg)
    res = simulate_schedule(
        CohortConfig(
            n_users=cfg.simulation.n_users,
            seed=cfg.simulation.seed,
            model=model,
            schedule=schedule,
            effect=C.build_effect(cfg),
            revenue=C.build_revenue(cfg),
            n_jobs=cfg.simulation.n_jobs,
        )
    )
    rows = [
        (t, s, f, lo, hi, rev)
        for t, (s, f, (lo, hi), rev) in enumerate(
            zip(res.survivors_per_period, res.survival_fraction, res.ci_95, res.realized_revenue)
        )
    ]
    run.table(
        "cohort.csv",
        ["period", "survivors", "survival_fraction", "ci_lo", "ci_hi", "realized_revenue"],
        rows,
    )
    run.doc(
        "simulate.json",
        C.SimulateDoc(
            seed=res.seed,
            n_users=res.n_users,
            mode="arum" if isinstance(model, ArumSpec) else "direct",
            periods=len(res.survivors_per_period) - 1,
            final_survivors=res.survivors_per_period[-1],
            final_fraction=res.final_fraction,
            final_ci_95=list(res.ci_95[-1]),
        ),
    )
    return EXIT_OK


def cmd_estimate(run):
    cfg = run.cfg
    sim = cfg.simulation
    if sim.arms == 0:
        raise RolloutError("simulation.arms must be > 0")
    xs = sim.arm_max * np.arange(1, sim.arms + 1) / sim.arms
    est = estimate_p(_model(cfg), xs, sim.n_per_arm, sim.seed)
    fitted = est.fitted
    run.table(
        "arms.csv",
        ["x", "n", "stayed", "p_hat", "ci_lo", "ci_hi", "p_fitted"],
        [
            (x, est.n_per_arm, round(p * est.n_per_arm), p, lo, hi, fitted.p(x))
            for x, p, (lo, hi) in zip(est.x_samples, est.p_hat, est.ci_95)
        ],
    )
    status, opt_doc = EXIT_OK, None
    if sim.chain:
        result, opt_doc = _run_optimize(run, fitted, dispatch=False)
        status = _cap_status(run, result)
    run.doc(
        "estimate.json",
        C.EstimateDoc(
            seed=sim.seed,
            arms=sim.arms,
            n_per_arm=sim.n_per_arm,
            wide_ci_warning=est.wide_ci_warning,
            fitted_curve=C.FittedCurveDoc(x=list(fitted.xs), p=list(fitted.ps)),
            optimization=opt_doc,
        ),
    )
    return status


def cmd_sweep_rate(run):
    cfg = run.cfg
    curve = C.build_curve(cfg)
    clock = C.build_clock(cfg)
    A, n = cfg.sweep_rate.A, cfg.sweep_rate.points
    report = is_inelastic(clock, A * np.geomspace(1e-6, 1 - 1e-6, 64))
    x_lo, x_hi = A * 1e-3, A * (1 - 1e-3)
    if report:
        rates = np.geomspace(avg_rate(clock, A, x_lo), avg_rate(clock, A, x_hi), n)
        xs = np.array([invert_rate(clock, A, r) for r in rates])
    else:
        # elastic clock: no monotone inversion, report the forward map instead
        xs = np.linspace(x_lo, x_hi, n)
        rates = np.array([avg_rate(clock, A, x) for x in xs])
    s = np.array([survival_s(curve, A, x) for x in xs])
    order = np.argsort(rates, kind="stable")
    run.table("sweep_rate.csv", ["rbar", "x", "s"], zip(rates, xs, s))
    run.doc(
        "sweep_rate.json",
        C.SweepRateDoc(
            A=A,
            points=n,
            inelastic=bool(report),
            rate_monotone=bool(np.all(np.diff(rates) > 0)),
            survival_nonincreasing=bool(np.all(np.diff(s[order]) <= 1e-12 * s[order][:-1])),
        ),
    )
    return EXIT_OK


COMMANDS = {
    "classify": cmd_classify,
    "optimize": cmd_optimize,
    "simulate": cmd_simulate,
    "estimate": cmd_estimate,
    "sweep-rate": cmd_sweep_rate,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="rolloutopt", description=__doc__.split("\n")[0])
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="path to the JSON run config")
    parser.add_argument("--out", help="output directory (overrides output.dir)")
    parser.add_argument("--seed", type=int, help="simulation seed (overrides simulation.seed)")
    parser.add_argument("--grid-step", type=float, help="sweep grid spacing")
    parser.add_argument("--allow-cap", action="store_true", help="accept capped step counts")
    return parser


def main(argv=None):
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = apply_overrides(load_config(args.config), args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[args.command](_Run(cfg, args))
    except RolloutError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
