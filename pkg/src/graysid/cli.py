"""``sid`` command-line interface.

Exit codes: 0 success, 2 configuration error, 3 stage failure, 4 solver infeasible.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import io
from . import workbench as wb
from .config import ConfigError, ExperimentConfig, builtin_configs, load_config
from .constrain import InfeasibleError, SdpProblem, solve_constrained, verify_solution
from .features import (BoundedPriors, FeatureConfig, extract_features, priors_from_features,
                       regions_from_priors)
from .figures import Figure
from .subspace import HankelConfig, pi_moesp

EXIT_OK, EXIT_CONFIG, EXIT_STAGE, EXIT_INFEASIBLE = 0, 2, 3, 4


def _common(p, config_required=False):
    p.add_argument("--config", required=config_required,
                   help="config JSON path or shipped name (" + ", ".join(builtin_configs()) + ")")
    p.add_argument("--seed", type=int, help="master seed override")
    p.add_argument("--runs", type=int, help="Monte Carlo run count override")
    p.add_argument("--out", help="output directory")
    p.add_argument("--format", choices=("csv", "json", "svg"), default="svg",
                   help="svg writes CSV plus SVG figures; csv/json pick the table format, no figures")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sid", description="Subspace identification with eigenvalue-region priors.",
        epilog="Exit codes: 0 success, 2 configuration error, 3 stage failure, 4 solver infeasible.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="PRBS identification experiment")
    _common(p, True)
    p = sub.add_parser("step", help="noisy step test")
    _common(p, True)

    p = sub.add_parser("features", help="step-response features and priors")
    _common(p)
    p.add_argument("--input", help="step-response signal CSV (t,u1,y1)")
    p.add_argument("--selector", choices=("half", "full"))

    p = sub.add_parser("region", help="LMI region from priors")
    _common(p)
    p.add_argument("--case", help="case name (default: all cases)")
    p.add_argument("--ts", type=float)
    p.add_argument("--zeta-min", type=float)
    p.add_argument("--wd-max", type=float)
    p.add_argument("--zeta-wn-min", type=float)
    p.add_argument("--overshoot", choices=("conservative", "inner", "circle"))
    p.add_argument("--conic", action="store_true")
    p.add_argument("--settling", action="store_true")
    p.add_argument("--stability", action="store_true")

    p = sub.add_parser("identify", help="PI-MOESP identification")
    _common(p)
    p.add_argument("--input", help="signal CSV (t,u1..,y1..)")
    p.add_argument("--past", type=int, default=10)
    p.add_argument("--future", type=int, default=10)
    p.add_argument("--order", type=int)

    p = sub.add_parser("constrain", help="constrained re-estimation of A")
    _common(p)
    p.add_argument("--model", help="model JSON")
    p.add_argument("--region", help="region JSON")
    p.add_argument("--p-min", type=float, default=1.0)
    p.add_argument("--solver", default="CLARABEL")

    p = sub.add_parser("pipeline", help="full procedure, one noise realization")
    _common(p, True)
    p = sub.add_parser("montecarlo", help="Monte Carlo sweep over noise realizations")
    _common(p, True)
    p.add_argument("--workers", type=int)

    p = sub.add_parser("gallery", help="region boundary gallery")
    _common(p)
    p.add_argument("--zeta", type=float, nargs="*", default=[], help="minimum damping ratios")
    p.add_argument("--ts", type=float, help="sampling period (s), needed with --wd/--zeta-wn")
    p.add_argument("--wd", type=float, nargs="*", default=[], help="maximum damped frequencies (rad/s)")
    p.add_argument("--zeta-wn", type=float, nargs="*", default=[], help="minimum decay rates (rad/s)")
    p.add_argument("--points", type=int, default=720, help="boundary samples per curve")
    return parser


def _load(args) -> ExperimentConfig | None:
    if not args.config:
        return None
    cfg = load_config(args.config)
    return cfg.with_overrides(seed=args.seed, runs=args.runs, out=args.out,
                              workers=getattr(args, "workers", None))


def _outdir(args, cfg, default) -> Path:
    if args.out:
        return Path(args.out)
    if cfg is not None and cfg.out:
        return Path(cfg.out)
    return Path("sid_out") / (cfg.name if cfg is not None else default)


def _write_signal(path: Path, rec, fmt):
    if fmt == "json":
        return io.write_json(path.with_suffix(".json"),
                             {"ts": rec.ts, "t": rec.t, **{k: rec.channels[k] for k in rec.header()[1:]}})
    return io.write_signal(path.with_suffix(".csv"), rec)


def _report(msg):
    print(msg)


def cmd_simulate(args):
    cfg = _load(args)
    out = _outdir(args, cfg, "simulate")
    seed = wb.run_seeds(cfg, 1)[0]
    with wb._stage("simulate"):
        noisy, clean = wb.identification_data(cfg, seed)
    _report(f"wrote {_write_signal(out / 'identification_data', noisy, args.format)}")
    _report(f"wrote {_write_signal(out / 'identification_clean', clean, args.format)}")


def cmd_step(args):
    cfg = _load(args)
    out = _outdir(args, cfg, "step")
    with wb._stage("step-test"):
        noisy, clean = wb.step_test(cfg, args.seed)
    _report(f"wrote {_write_signal(out / 'step_test', noisy, args.format)}")
    _report(f"wrote {_write_signal(out / 'step_clean', clean, args.format)}")
    if args.format == "svg":
        fig = Figure("step test", "t (s)", "y")
        fig.line("noisy", noisy.t, noisy.y[:, 0]).line("noise-free", clean.t, clean.y[:, 0])
        _report(f"wrote {fig.write(out / 'step_test.svg')[0]}")


def cmd_features(args):
    cfg = _load(args)
    if args.input:
        rec = io.read_signal(args.input)
        fcfg = cfg.features if cfg else FeatureConfig()
    elif cfg is not None:
        rec, _ = wb.step_test(cfg)
        fcfg = cfg.features
    else:
        raise ConfigError("features needs --input or --config")
    if args.selector:
        fcfg = FeatureConfig(**{**fcfg.__dict__, "selector": args.selector})
    with wb._stage("features"):
        sf = extract_features(rec, fcfg)
        pri = priors_from_features(sf)
    doc = {"features": sf.to_dict(), "priors": {"zeta": pri.zeta, "wd": pri.wd, "zeta_wn": pri.zeta_wn}}
    path = io.write_json(_outdir(args, cfg, "features") / "features.json", doc)
    _report(json.dumps(io.to_jsonable(doc["priors"])))
    _report(f"wrote {path}")


def cmd_region(args):
    cfg = _load(args)
    out = _outdir(args, cfg, "region")
    regions = {}
    if cfg is not None:
        cases = [c for c in cfg.cases if args.case in (None, c.name)]
        if not cases:
            raise ConfigError(f"no case named {args.case!r}")
        for c in cases:
            st = wb.case_setup(cfg, c)
            regions[c.name] = st.region
            io.write_json(out / c.name / "priors.json", st.to_dict())
    else:
        if args.ts is None:
            raise ConfigError("region needs --config or --ts with prior bounds")
        bounded = BoundedPriors(args.zeta_min, args.wd_max, args.zeta_wn_min)
        with wb._stage("region"):
            regions["region"] = regions_from_priors(bounded, args.ts, args.overshoot, args.conic,
                                                    args.settling, args.stability)
    for name, reg in regions.items():
        base = out / name if cfg is not None else out
        _report(f"wrote {io.write_region(base / 'region.json', reg)}")
        if args.format == "svg":
            fig = Figure(reg.label, "Re z", "Im z", equal_aspect=True)
            wb._region_lines(fig, name, reg, None)
            _report(f"wrote {fig.write(base / 'region.svg')[0]}")


def cmd_identify(args):
    cfg = _load(args)
    out = _outdir(args, cfg, "identify")
    if args.input:
        rec = io.read_signal(args.input)
        hc = cfg.identification if cfg else HankelConfig(args.past, args.future, args.order)
        with wb._stage("identify"):
            res = pi_moesp(rec.u, rec.y, hc, rec.ts)
    elif cfg is not None:
        with wb._stage("simulate"):
            rec, _ = wb.identification_data(cfg, wb.run_seeds(cfg, 1)[0])
        res = wb.identify(cfg, rec)
    else:
        raise ConfigError("identify needs --input or --config")
    s = res.singular_values
    io.write_csv(out / "singular_values.csv", ["index", "sigma", "normalized"],
                 [(i + 1, v, v / s[0]) for i, v in enumerate(s)])
    _report(f"order {res.order}, spectral radius {res.model.spectral_radius():.6g}")
    _report(f"wrote {io.write_model(out / 'model.json', res.model)}")


def cmd_constrain(args):
    cfg = _load(args)
    out = _outdir(args, cfg, "constrain")
    if args.model and args.region:
        model = io.read_model(args.model)
        region = io.read_region(args.region)
        with wb._stage("constrain"):
            problem = SdpProblem(model.a, region, args.p_min, solver=args.solver)
            sol = solve_constrained(problem)
        jobs = [("", model, problem, sol)]
    elif cfg is not None:
        with wb._stage("simulate"):
            rec, _ = wb.identification_data(cfg, wb.run_seeds(cfg, 1)[0])
        model = wb.identify(cfg, rec).model
        jobs = []
        for c in cfg.cases:
            region = wb.case_setup(cfg, c).region
            problem, sol, _ = wb.constrain(cfg, model.a, region)
            jobs.append((c.name, model, problem, sol))
    else:
        raise ConfigError("constrain needs --model and --region, or --config")
    infeasible = []
    for name, model, problem, sol in jobs:
        base = out / name if name else out
        io.write_json(base / "problem.json", problem.to_dict())
        io.write_json(base / "solution.json", sol.to_dict())
        keys = sorted({k for row in sol.trace for k in row})
        io.write_csv(base / "solver_trace.csv", keys, [[r.get(k, "") for k in keys] for r in sol.trace])
        _report(f"{name or 'solution'}: status {sol.status}, objective {sol.objective:.6g}")
        if sol.status == "infeasible":
            infeasible.append(name or "solution")
            continue
        if sol.status != "optimal":
            raise wb.StageError("constrain", f"solver stopped with status {sol.status}")
        rep = verify_solution(sol, problem.region, problem.a_star)
        io.write_json(base / "verification.json", rep.to_dict())
        if not rep.ok:
            raise wb.StageError("verify", "constrained model fails verification")
        _report(f"wrote {io.write_model(base / 'model.json', model.with_a(sol.a_hat))}")
    if infeasible:
        raise InfeasibleError(f"region constraint infeasible: {', '.join(infeasible)}")


def cmd_pipeline(args):
    cfg = _load(args)
    out = _outdir(args, cfg, "pipeline")
    summary = wb.run_pipeline(cfg, out, figures=args.format == "svg")
    for name, entry in summary["cases"].items():
        _report(f"{name}: {entry['status']}, objective {entry['objective']:.6g}")
    _report(f"wrote {len(summary['files'])} files to {out}")


def cmd_montecarlo(args):
    cfg = _load(args)
    out = _outdir(args, cfg, "montecarlo")
    rep = wb.run_montecarlo(cfg)
    files = wb.write_montecarlo(cfg, rep, out, figures=args.format == "svg")
    agg = rep.aggregate()
    u = agg["unconstrained"]
    _report(f"{rep.runs} runs; unconstrained unstable: {u['unstable']}, failed: {u['failed']}")
    for c, a in agg["cases"].items():
        frac = "n/a" if a["inside_fraction"] is None else f"{100 * a['inside_fraction']:.1f}%"
        _report(f"{c}: optimal {a['optimal']}/{rep.runs}, inside {frac}")
    _report(f"wrote {len(files)} files to {out}")


def cmd_gallery(args):
    cfg = _load(args)
    out = _outdir(args, cfg, "gallery")
    ts = args.ts if args.ts is not None else (cfg.ts if cfg else None)
    try:
        figs = wb.region_gallery(args.zeta, ts, args.wd, args.zeta_wn, args.points)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    for name, fig in figs:
        if args.format == "svg":
            paths = fig.write(out / f"{name}.svg")
        else:
            paths = [io.write_csv(out / f"{name}.csv", ["series", "kind", "index", "x", "y", "y2"],
                                  fig.rows())]
        for p in paths:
            _report(f"wrote {p}")


COMMANDS = {
    "simulate": cmd_simulate,
    "step": cmd_step,
    "features": cmd_features,
    "region": cmd_region,
    "identify": cmd_identify,
    "constrain": cmd_constrain,
    "pipeline": cmd_pipeline,
    "montecarlo": cmd_montecarlo,
    "gallery": cmd_gallery,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"sid: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InfeasibleError as exc:
        print(f"sid: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except wb.StageError as exc:
        print(f"sid: stage failure {exc}", file=sys.stderr)
        return EXIT_STAGE
    except (OSError, ValueError, KeyError, np.linalg.LinAlgError) as exc:
        print(f"sid: {args.command} failed: {exc}", file=sys.stderr)
        return EXIT_STAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
