"""Command-line front end. All Hz <-> rad/s conversion happens here."""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .describing import cutoff_ratio_beta, df_curve
from .lti import second_order_plant
from .loopshape import ASYMPTOTIC_MATCH, DesignSpec, OpenLoop, design_report, open_loop_df, pid_comparator, reset_pid_a, reset_pid_b
from .reset import ResetController, clegg, gfore
from .scenarios import SCENARIOS, ScenarioConfig, run
from .stability import Infeasible, StabilityProblem, check_stability

OUT_ENV = "RESETPID_OUT"
HZ = 2 * math.pi


def _out_dir(args) -> Path:
    d = Path(args.out or os.environ.get(OUT_ENV, "out"))
    d.mkdir(parents=True, exist_ok=True)
    if not os.access(d, os.W_OK):
        raise SystemExit(f"output directory {d} is not writable")
    return d


def _write(d: Path, files: dict):
    for name, text in files.items():
        (d / name).write_text(text)


def cmd_df(args) -> int:
    out = _out_dir(args)
    if args.beta_sweep:
        gammas = np.linspace(-0.9, 1.0, args.points or 21)
        rows = ["gamma,beta"] + [f"{g:.6f},{cutoff_ratio_beta(float(g))!r}" for g in gammas]
        (out / "beta.csv").write_text("\n".join(rows) + "\n")
        print(f"wrote {out / 'beta.csv'}")
        return 0
    w = HZ * np.logspace(math.log10(args.fmin_hz), math.log10(args.fmax_hz), args.points or 200)
    for g in args.gamma:
        try:
            el = gfore(HZ * args.corner_hz, g) if args.element == "gfore" else clegg(g)
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        path = out / f"df_{args.element}_gamma_{g:g}.csv"
        path.write_text(df_curve(el, w).to_csv())
        print(f"wrote {path}")
    return 0


def cmd_design(args) -> int:
    out = _out_dir(args)
    plant, _ = second_order_plant()
    spec = DesignSpec(HZ * args.wc_hz, args.pm_deg, alpha=args.alpha)
    if args.type == "pid":
        c = pid_comparator(spec, plant)
    elif args.type == "A":
        c = reset_pid_a(spec, plant)
    else:
        ref = ResetController.from_json(Path(args.match).read_text()) if args.match else pid_comparator(spec, plant)
        c = reset_pid_b(spec, plant, ref, match_factor=args.match_factor)
    ol = OpenLoop(c, plant)
    tag = args.type
    (out / f"controller_{tag}.json").write_text(c.to_json())
    w = HZ * np.logspace(0, 4, 400)
    from .lti import FrequencyCurve

    (out / f"open_loop_{tag}.csv").write_text(FrequencyCurve(w, [open_loop_df(ol, x) for x in w]).to_csv())
    rep = design_report(ol)
    rep["crossover_hz"] = rep["crossover_rad_s"] / HZ
    status = 0
    if not c.is_linear:
        result = check_stability(StabilityProblem.from_loop(c, plant), seed=args.seed)
        (out / f"stability_{tag}.json").write_text(json.dumps(result.to_dict(), sort_keys=True))
        rep["stability"] = type(result).__name__
        if args.strict and not rep["stability"] == "StabilityCertificate":
            status = 1
    (out / f"design_{tag}.json").write_text(json.dumps(rep, indent=2, sort_keys=True))
    print(f"{c.label}: crossover {rep['crossover_hz']:.3f} Hz, PM {rep['phase_margin_deg']:.3f} deg, Kp {c.kp:.6g}"
          + (f", stability {rep['stability']}" if "stability" in rep else ""))
    return status


def _load_config(args) -> ScenarioConfig:
    d = json.loads(Path(args.config).read_text()) if args.config else {}
    if "scenario" in d:
        d.pop("scenario")
    d.pop("output_dir", None)
    cfg = ScenarioConfig.from_dict(d)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    return cfg


def cmd_reproduce(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args)
    names = SCENARIOS if args.scenario == "all" else [args.scenario]
    summary = []
    for name in names:
        try:
            res = run(name, cfg)
        except Exception as exc:  # a failed stage is reported, not raised
            summary.append({"name": f"{name}: stage", "expected": "completes", "actual": repr(exc), "tolerance": None, "pass": False})
            continue
        sub = out / name
        sub.mkdir(exist_ok=True)
        _write(sub, res.files)
        summary.extend({**c, "name": f"{name}: {c['name']}"} for c in res.checks)
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True))
    for c in summary:
        print(f"{'PASS' if c['pass'] else 'FAIL'}  {c['name']}  actual={c['actual']}")
    return 0 if all(c["pass"] for c in summary) else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="resetpid", description="Reset PID design, analysis and reproduction.")
    p.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./out)")
    p.add_argument("--seed", type=int, default=None)
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("df", help="describing-function curves")
    d.add_argument("--element", choices=("gfore", "clegg"), default="gfore")
    d.add_argument("--corner-hz", type=float, default=100.0)
    d.add_argument("--gamma", type=float, nargs="+", default=[0.0])
    d.add_argument("--fmin-hz", type=float, default=1.0)
    d.add_argument("--fmax-hz", type=float, default=1e4)
    d.add_argument("--points", type=int, default=None)
    d.add_argument("--beta-sweep", action="store_true")
    d.set_defaults(func=cmd_df)

    g = sub.add_parser("design", help="design a controller on the nominal plant")
    g.add_argument("--type", choices=("A", "B", "pid"), required=True)
    g.add_argument("--wc-hz", type=float, default=150.0)
    g.add_argument("--pm-deg", type=float, default=45.0)
    g.add_argument("--alpha", type=float, default=0.7)
    g.add_argument("--match", help="reference PID controller JSON for type B")
    g.add_argument("--match-factor", type=float, default=ASYMPTOTIC_MATCH)
    g.add_argument("--strict", action="store_true", help="nonzero exit unless a stability certificate is found")
    g.set_defaults(func=cmd_design)

    r = sub.add_parser("reproduce", help="run a reproduction scenario")
    r.add_argument("scenario", choices=SCENARIOS + ("all",))
    r.add_argument("--config", help="JSON scenario configuration")
    r.set_defaults(func=cmd_reproduce)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "design" and args.seed is None:
        args.seed = 0
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
