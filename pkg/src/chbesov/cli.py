"""Command-line entry points.

Subcommands: simulate, iterate, analyze, bounds, equivalence,
probe-inequalities, continuity. Exit codes: 0 success, 1 configuration or
validation error, 2 runtime failure, 3 blow-up detected (simulate only; the
run directory is still fully written in that case, since a detected blow-up
is a result rather than a failure).
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__
from . import bounds as bd
from . import config as cf
from . import io as cio
from . import littlewood as lp
from . import model as md
from . import probes as pr
from . import spectral as sp
from . import stepping as st

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2
EXIT_BLOWUP = 3


def _timestamp() -> str:
    return datetime.now(timezone.utc).isoformat()


def _prepare_output(cfg: cf.RunConfig) -> str:
    out = cfg.resolved_output_dir()
    os.makedirs(out, exist_ok=True)
    return out


def _effective_schedules(cfg: cf.RunConfig):
    """Schedules that drive the theory bounds for the configured model.

    The damped reductions absorb their parameter into the damping rate; the
    matching accumulation is exp(-2 lambda t) against a silent second
    parameter, so the report reflects the system actually being solved.
    """
    if cfg.form == "nonlocal":
        return cfg.alpha(), cfg.gamma()
    return md.ExpDecaySchedule(1.0, cfg.lam), md.ZeroSchedule()


def _damped_norm_total(cfg: cf.RunConfig, initial: md.State, bank) -> float | None:
    if cfg.form == "nonlocal":
        return None
    b12 = lp.BesovParams(0.5, 2, 1)
    total = lp.besov_norm(initial.m, b12, bank)
    if cfg.form == "damped_sqq":
        total += lp.besov_norm(initial.n, b12, bank)
    return total


def _build_report(cfg: cf.RunConfig, initial: md.State, bank) -> bd.BoundsReport:
    alpha, gamma = _effective_schedules(cfg)
    return bd.build_bounds_report(
        initial.m,
        initial.n,
        alpha,
        gamma,
        bank,
        constant=cfg.constant_c,
        eps=cfg.epsilon,
        r=cfg.r,
        overrides=cfg.overrides,
        damped_norm_total=_damped_norm_total(cfg, initial, bank),
    )


def cmd_simulate(args) -> int:
    cfg = cf.load_config(args.config)
    out = _prepare_output(cfg)
    bank = cfg.filter_bank()
    initial = cfg.initial()
    dynamics = cfg.dynamics()
    report = _build_report(cfg, initial, bank)

    created = _timestamp()
    result = st.run(initial, dynamics, cfg.integrator(), bank)

    cio.write_series(result.series, os.path.join(out, "series.csv"))
    first_step, first_t, first_state = result.snapshots[0]
    cio.write_snapshot(first_state, first_t, os.path.join(out, "snapshot_initial.json"))
    with open(os.path.join(out, "snapshot_initial.txt"), "w", encoding="utf-8") as fh:
        fh.write(cio.render_snapshot_text(first_state, first_t))
    last_step, last_t, last_state = result.snapshots[-1]
    cio.write_snapshot(last_state, last_t, os.path.join(out, "snapshot_final.json"))
    with open(os.path.join(out, "snapshot_final.txt"), "w", encoding="utf-8") as fh:
        fh.write(cio.render_snapshot_text(last_state, last_t))
    for step, t, state in result.snapshots[1:-1]:
        cio.write_snapshot(state, t, os.path.join(out, f"snapshot_step{step:06d}.json"))

    calibration = None
    if result.status == "blowup_detected":
        t_lower = report.blowup_critical
        consistent = bool(result.t_star_num >= t_lower) if math.isfinite(t_lower) else True
        calibration = {
            "t_star_num": result.t_star_num,
            "critical_lower_bound": t_lower if math.isfinite(t_lower) else "inf",
            "consistent": consistent,
        }
        if not consistent:
            calibration["note"] = (
                "detected blow-up precedes the critical lower bound; "
                "read as a calibration of the constant C, not a failure"
            )

    manifest = {
        "tool": "chbesov",
        "version": __version__,
        "created": created,
        "finished": _timestamp(),
        "status": result.status,
        "steps": result.steps,
        "final_time": result.final_time,
        "t_star_num": result.t_star_num,
        "config": cfg.raw,
        "bounds": report.as_dict(),
        "calibration": calibration,
    }
    cio.write_manifest(manifest, os.path.join(out, "manifest.json"))

    print(f"status: {result.status}")
    print(f"steps: {result.steps}  final time: {result.final_time:.12g}")
    if result.t_star_num is not None:
        print(f"detected blow-up time: {result.t_star_num:.12g}")
    print(f"outputs: {out}")
    if result.status == "blowup_detected":
        return EXIT_BLOWUP
    if result.status == "aborted":
        print("run aborted: non-finite values appeared", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def cmd_iterate(args) -> int:
    cfg = cf.load_config(args.config)
    if cfg.form != "nonlocal":
        print("iterate: the iteration scheme applies to the nonlocal form only",
              file=sys.stderr)
        return EXIT_CONFIG
    out = _prepare_output(cfg)
    bank = cfg.filter_bank()
    initial = cfg.initial()
    alpha, gamma = cfg.alpha(), cfg.gamma()

    b12 = lp.BesovParams(0.5, 2, 1)
    f0 = lp.besov_norm(initial.m, b12, bank) + lp.besov_norm(initial.n, b12, bank)
    a_star = bd.lifespan_fixed_point(f0, cfg.constant_c)
    acc_end = bd.accumulated_parameter(alpha, gamma, cfg.t_end)
    bound = bd.uniform_bound(f0, min(a_star, acc_end), cfg.constant_c)

    try:
        fr = st.friedrichs_iterate(initial, args.k, alpha, gamma, cfg.integrator(),
                                   bank, uniform_bound=bound)
    except FloatingPointError as exc:
        print(f"iterate: {exc}", file=sys.stderr)
        return EXIT_RUNTIME

    path = os.path.join(out, "iterates.csv")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("k,x12_sup_norm,diff_from_previous\n")
        for i, norm in enumerate(fr.norms):
            diff = fr.differences[i - 1] if i >= 1 else math.nan
            fh.write("%d,%.17g,%.17g\n" % (i + 1, norm, diff))

    print(f"uniform step: {fr.dt:.12g} ({len(fr.times) - 1} steps)")
    print(f"theory bound on the X_{{1/2,1}} norms: {bound:.12g}")
    for i, norm in enumerate(fr.norms):
        line = f"k={i + 1}  F={norm:.12g}"
        if i >= 1:
            line += f"  D={fr.differences[i - 1]:.6e}"
        print(line)
    print(f"outputs: {path}")
    return EXIT_OK


def _axis_value(text: str, flag: str) -> float:
    if text == "inf":
        return math.inf
    try:
        return float(text)
    except ValueError:
        raise ValueError(f"{flag}: expected a number or 'inf', got {text!r}") from None


def cmd_analyze(args) -> int:
    t, state = cio.read_snapshot(args.snapshot)
    p = _axis_value(args.p, "--p")
    r = _axis_value(args.r, "--r")
    params = lp.BesovParams(args.s, p, r, homogeneous=args.homogeneous)
    bank = lp.build_filter_bank(state.n_modes, "smooth")
    prefix = "hB" if args.homogeneous else "B"
    label = f"{prefix}^{args.s:g}_{{{args.p},{args.r}}}"
    print(f"snapshot: t = {t:.12g}, n_modes = {state.n_modes}")
    print(f"{label}(m) = {lp.besov_norm(state.m, params, bank):.12g}")
    print(f"{label}(n) = {lp.besov_norm(state.n, params, bank):.12g}")
    return EXIT_OK


def cmd_bounds(args) -> int:
    cfg = cf.load_config(args.config)
    out = _prepare_output(cfg)
    bank = cfg.filter_bank()
    initial = cfg.initial()
    report = _build_report(cfg, initial, bank)
    doc = report.as_dict()
    cio.write_json(doc, os.path.join(out, "bounds.json"))
    width = max(len(k) for k in doc)
    for key in sorted(doc):
        print(f"{key:<{width}}  {doc[key]}")
    print(f"outputs: {os.path.join(out, 'bounds.json')}")
    return EXIT_OK


def cmd_equivalence(args) -> int:
    cfg = cf.load_config(args.config)
    reduction = "sqq" if cfg.form == "damped_sqq" else "forq"
    initial = cfg.initial()
    bank = cfg.filter_bank()
    integ = cfg.integrator()

    damped = st.run(initial, md.DampedDynamics(args.lam, form=reduction), integ, bank)
    if damped.status != "completed":
        print(f"equivalence: damped run ended with status {damped.status}", file=sys.stderr)
        return EXIT_RUNTIME
    twin = md.NonlocalDynamics(md.ExpDecaySchedule(1.0, args.lam), md.ZeroSchedule())
    nonlocal_run = st.run(initial, twin, integ, bank, dt_sequence=damped.dt_sequence)
    if nonlocal_run.status != "completed":
        print(f"equivalence: comparison run ended with status {nonlocal_run.status}",
              file=sys.stderr)
        return EXIT_RUNTIME

    factor = math.exp(args.lam * damped.final_time)
    disc = 0.0
    for a, b in ((damped.final_state.m, nonlocal_run.final_state.m),
                 (damped.final_state.n, nonlocal_run.final_state.n)):
        rescaled = factor * sp.to_grid(a).values
        disc = max(disc, float(np.max(np.abs(rescaled - sp.to_grid(b).values))))
    print(f"form: {reduction}  lambda: {args.lam:g}  matched steps: {damped.steps}")
    print(f"max discrepancy: {disc:.6e}")
    return EXIT_OK


def cmd_probe(args) -> int:
    bank = lp.build_filter_bank(args.n_modes, "smooth")
    corpus = pr.probe_corpus(args.n_modes, args.trials, args.seed)
    failed = False
    for name in pr.PROBE_NAMES:
        report = pr.inequality_probe(name, corpus, bank)
        finite = math.isfinite(report.c_emp)
        failed = failed or not finite
        print(f"{name}: C_emp = {report.c_emp:.6g} over {len(report.ratios)} ratios")
    return EXIT_OK if not failed else EXIT_RUNTIME


def cmd_continuity(args) -> int:
    cfg = cf.load_config(args.config)
    bank = cfg.filter_bank()
    initial = cfg.initial()
    deltas = [float(v) for v in args.deltas.split(",") if v]
    if not deltas or any(d <= 0 for d in deltas):
        print("continuity: --deltas needs positive comma-separated values", file=sys.stderr)
        return EXIT_CONFIG
    try:
        rows = bd.continuity_probe(initial, cfg.dynamics, cfg.integrator(), bank,
                                   deltas=tuple(deltas))
    except RuntimeError as exc:
        print(f"continuity: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print("delta  dist_X(-1/2,1)  dist_X(1/2,1)  flagged")
    for row in rows:
        print("%.3e  %.8e  %.8e  %s"
              % (row["delta"], row["dist_low"], row["dist_high"], row["flagged"]))
    clean = [r for r in rows if not r["flagged"]]
    if len(clean) >= 2:
        xs = np.log([r["delta"] for r in clean])
        ys = np.log([r["dist_low"] for r in clean])
        slope = float(np.polyfit(xs, ys, 1)[0])
        print(f"log-log slope: {slope:.4f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chbesov",
        description="Pseudospectral simulator and analysis toolkit for a "
                    "two-component nonlocal transport system on the torus.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="integrate a configured run and write outputs")
    p.add_argument("config")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("iterate", help="run the linear iteration scheme")
    p.add_argument("config")
    p.add_argument("--k", type=int, default=8, help="number of iterates (default 8)")
    p.set_defaults(func=cmd_iterate)

    p = sub.add_parser("analyze", help="Besov norms of a stored snapshot")
    p.add_argument("snapshot")
    p.add_argument("--s", type=float, required=True, help="regularity index")
    p.add_argument("--p", default="2", help="integrability index: 2 or inf")
    p.add_argument("--r", default="2", help="summation index: 1, 2, or inf")
    p.add_argument("--homogeneous", action="store_true")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("bounds", help="evaluate every closed-form bound")
    p.add_argument("config")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("equivalence", help="damped reduction vs rescaled nonlocal run")
    p.add_argument("config")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.set_defaults(func=cmd_equivalence)

    p = sub.add_parser("probe-inequalities", help="empirical constants for the inequalities")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-modes", dest="n_modes", type=int, default=128)
    p.set_defaults(func=cmd_probe)

    p = sub.add_parser("continuity", help="data-to-solution continuity probe")
    p.add_argument("config")
    p.add_argument("--deltas", default="1e-2,1e-3,1e-4")
    p.set_defaults(func=cmd_continuity)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except cf.ConfigError as exc:
        for line in exc.errors:
            print(f"config error: {line}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
