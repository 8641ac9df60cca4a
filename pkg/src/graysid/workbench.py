"""Experiment orchestration: single pipeline runs, Monte Carlo sweeps, region gallery."""

from __future__ import annotations

import contextlib
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io
from . import regions as rg
from .config import CaseSpec, ConfigError, ExperimentConfig
from .constrain import InfeasibleError, SdpProblem, solve_constrained, verify_solution
from .features import (FeatureConfig, PriorEstimates, aggregate_priors, apply_tuning,
                       extract_features, priors_from_features, regions_from_priors)
from .figures import Figure
from .lti import (DiscreteStateSpace, SignalRecord, colored_noise, frequency_response,
                  prbs, simulate, step_response)
from .subspace import pi_moesp

__all__ = [
    "StageError",
    "CaseSetup",
    "MonteCarloReport",
    "run_seeds",
    "identification_data",
    "step_test",
    "case_setup",
    "identify",
    "constrain",
    "run_pipeline",
    "run_montecarlo",
    "write_montecarlo",
    "region_gallery",
    "bode_grid",
]


class StageError(RuntimeError):
    """A pipeline stage failed; ``stage`` names it."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


@contextlib.contextmanager
def _stage(name):
    try:
        yield
    except (StageError, ConfigError, InfeasibleError):
        raise
    except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        raise StageError(name, str(exc)) from exc


def run_seeds(cfg: ExperimentConfig, runs: int | None = None) -> list[int]:
    """Noise seeds for each run, all derived from the master seed."""
    runs = cfg.runs if runs is None else runs
    if cfg.noise is not None and cfg.noise.seed_policy == "fixed":
        return [cfg.noise.seed] * runs
    children = np.random.SeedSequence(cfg.seed).spawn(runs)
    return [int(c.generate_state(1, dtype=np.uint32)[0]) for c in children]


def identification_data(cfg: ExperimentConfig, noise_seed: int):
    """PRBS experiment on the true plant; returns ``(noisy, clean)`` records."""
    ex = cfg.excitation
    N = cfg.samples
    u = prbs(ex.bits, ex.hold, N, ex.amplitude, ex.seed)
    clean = simulate(cfg.plant, u)
    if cfg.noise is None or cfg.noise.sigma == 0:
        return clean, clean
    nu = colored_noise(cfg.noise.filter, cfg.ts, cfg.noise.sigma, N, noise_seed, cfg.noise.burn_in)
    return simulate(cfg.plant, u, output_noise=nu), clean


def step_test(cfg: ExperimentConfig, seed: int | None = None):
    """Noisy step test at the configured SNR; returns ``(noisy, clean)``.

    The noise is the identification filter output (white noise without a
    filter), rescaled so ``10 log10(var(clean) / var(noise))`` equals the SNR.
    """
    st = cfg.step_test
    seed = st.seed if seed is None else seed
    clean = step_response(_scaled(cfg.plant, st.amplitude), st.duration)
    if st.snr_db is None:
        return clean, clean
    N = len(clean)
    if cfg.noise is not None:
        raw = colored_noise(cfg.noise.filter, cfg.ts, 1.0, N, seed, cfg.noise.burn_in)
    else:
        raw = np.random.default_rng(seed).standard_normal(N)
    y = clean.y[:, 0]
    scale = math.sqrt(np.var(y) / (np.var(raw) * 10 ** (st.snr_db / 10)))
    noisy = SignalRecord.from_arrays(cfg.ts, clean.u, y + scale * raw, clean.t[0])
    return noisy, clean


def _scaled(model: DiscreteStateSpace, k: float) -> DiscreteStateSpace:
    return DiscreteStateSpace(model.a, k * model.b, model.c, k * model.d, model.ts)


@dataclass
class CaseSetup:
    case: CaseSpec
    estimates: list
    mean: PriorEstimates
    spread: dict
    bounded: object
    region: rg.LmiRegion
    features: dict | None = None

    def to_dict(self) -> dict:
        b = self.bounded
        return {
            "case": self.case.name,
            "estimates": [{"zeta": e.zeta, "wd": e.wd, "zeta_wn": e.zeta_wn} for e in self.estimates],
            "mean": {"zeta": self.mean.zeta, "wd": self.mean.wd, "zeta_wn": self.mean.zeta_wn},
            "spread": self.spread,
            "bounds": {"zeta_min": b.zeta_min, "wd_max": b.wd_max, "zeta_wn_min": b.zeta_wn_min,
                       "delta_zeta": b.delta_zeta, "delta_wd": b.delta_wd,
                       "delta_zeta_wn": b.delta_zeta_wn},
            "regions": {"overshoot": self.case.regions.overshoot, "conic": self.case.regions.conic,
                        "settling": self.case.regions.settling,
                        "stability": self.case.regions.stability},
            "features": self.features,
        }


def case_setup(cfg: ExperimentConfig, case: CaseSpec, step_record: SignalRecord | None = None) -> CaseSetup:
    """Priors, tuned bounds and the intersected region of one case (Steps 2 to 5)."""
    feats = None
    with _stage("features"):
        if case.priors.mode == "from-step-test":
            if step_record is None:
                step_record, _ = step_test(cfg)
            fcfg = cfg.features if case.priors.features is None else FeatureConfig.from_dict(case.priors.features)
            sf = extract_features(step_record, fcfg)
            feats = sf.to_dict()
            estimates = [priors_from_features(sf)]
        else:
            estimates = [PriorEstimates(**e) for e in case.priors.estimates]
    with _stage("priors"):
        mean, spread = aggregate_priors(estimates, case.priors.spread_rule)
        t = case.tuning
        if t.from_spread:
            deltas = [spread.get(k) or 0.0 for k in ("zeta", "wd", "zeta_wn")]
        else:
            deltas = [t.delta_zeta, t.delta_wd, t.delta_zeta_wn]
        bounded = apply_tuning(mean, *deltas, ts=cfg.ts)
    with _stage("region"):
        f = case.regions
        region = regions_from_priors(bounded, cfg.ts, f.overshoot, f.conic, f.settling, f.stability)
    return CaseSetup(case, estimates, mean, spread, bounded, region, feats)


def identify(cfg: ExperimentConfig, record: SignalRecord):
    with _stage("identify"):
        return pi_moesp(record.u, record.y, cfg.identification, cfg.ts)


def _problem(s, a_star, region) -> SdpProblem:
    return SdpProblem(a_star, region, p_min=s.p_min, margin=s.margin, p_max=s.p_max, solver=s.name,
                      tol_feas=s.tol_feas, tol_gap=s.tol_gap, max_iter=s.max_iter)


def constrain(cfg: ExperimentConfig, a_star, region: rg.LmiRegion):
    """Solve and verify; returns ``(problem, solution, report_or_None)``."""
    s = cfg.solver
    with _stage("constrain"):
        problem = _problem(s, a_star, region)
        sol = solve_constrained(problem)
        report = verify_solution(sol, region, a_star, s.verify_tol) if sol.status == "optimal" else None
    return problem, sol, report


def bode_grid(ts: float, points: int = 200) -> np.ndarray:
    """Log-spaced angular frequencies from 1e-2 rad/s to the Nyquist frequency."""
    return np.logspace(-2, math.log10(math.pi / ts), points)


def _dc_gain(model: DiscreteStateSpace):
    if model.spectral_radius() >= 1:
        return None
    g = model.c @ np.linalg.solve(np.eye(model.order) - model.a, model.b) + model.d
    return None if abs(g[0, 0]) < 1e-12 else float(g[0, 0])


def _normalized_step(model: DiscreteStateSpace, duration: float):
    g = _dc_gain(model)
    if g is None:
        return None
    return step_response(model, duration).y[:, 0] / g


def _fit_percent(ref, est):
    den = np.linalg.norm(ref - ref.mean())
    return float(100 * (1 - np.linalg.norm(ref - est) / den)) if den > 0 else float("nan")


def _eig_rows(eig):
    return [[float(z.real), float(z.imag)] for z in np.sort_complex(np.asarray(eig))]


# single pipeline run


def run_pipeline(cfg: ExperimentConfig, out, figures: bool = True, seed_index: int = 0) -> dict:
    """Procedure Steps 1 to 7 for one noise realization; every artifact goes under ``out``."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    files = []

    def emit(path):
        files.append(str(Path(path).relative_to(out)))
        return path

    emit(io.write_json(out / "config.json", {**cfg.raw, "seed": cfg.seed}))
    seed = run_seeds(cfg, seed_index + 1)[seed_index]

    with _stage("simulate"):
        data, clean = identification_data(cfg, seed)
    emit(io.write_signal(out / "identification_data.csv", data))

    ident = identify(cfg, data)
    model = ident.model
    emit(io.write_model(out / "model_unconstrained.json", model))
    s = ident.singular_values
    emit(io.write_csv(out / "singular_values.csv", ["index", "sigma", "normalized"],
                      [(i + 1, v, v / s[0]) for i, v in enumerate(s)]))

    with _stage("step-test"):
        noisy_step, clean_step = step_test(cfg)
    emit(io.write_signal(out / "step_test.csv", noisy_step))
    emit(io.write_signal(out / "step_clean.csv", clean_step))
    with _stage("features"):
        try:
            sf = extract_features(noisy_step, cfg.features)
            pri = priors_from_features(sf)
            feat_doc = {"features": sf.to_dict(), "priors": {"zeta": pri.zeta, "wd": pri.wd,
                                                             "zeta_wn": pri.zeta_wn}}
        except ValueError as exc:
            if any(c.priors.mode == "from-step-test" for c in cfg.cases):
                raise
            feat_doc = {"features": None, "priors": None, "error": str(exc)}
    emit(io.write_json(out / "features.json", feat_doc))

    setups = [case_setup(cfg, c, noisy_step) for c in cfg.cases]
    results = {}
    models = {"true": cfg.plant, "unconstrained": model}
    infeasible = []
    for st in setups:
        cdir = out / "cases" / st.case.name
        emit(io.write_json(cdir / "priors.json", st.to_dict()))
        emit(io.write_region(cdir / "region.json", st.region))
        problem, sol, report = constrain(cfg, model.a, st.region)
        emit(io.write_json(cdir / "problem.json", problem.to_dict()))
        emit(io.write_json(cdir / "solution.json", sol.to_dict()))
        trace_keys = sorted({k for row in sol.trace for k in row})
        emit(io.write_csv(cdir / "solver_trace.csv", trace_keys,
                          [[row.get(k, "") for k in trace_keys] for row in sol.trace]))
        entry = {"status": sol.status, "objective": sol.objective}
        if sol.status == "infeasible":
            infeasible.append(st.case.name)
        elif sol.status != "optimal":
            raise StageError("constrain", f"case {st.case.name}: solver stopped with status {sol.status}")
        else:
            if not report.ok:
                raise StageError("verify", f"case {st.case.name}: constrained model fails verification")
            cm = model.with_a(sol.a_hat)
            models[st.case.name] = cm
            emit(io.write_model(cdir / "model.json", cm))
            emit(io.write_json(cdir / "verification.json", report.to_dict()))
            entry["verification"] = report.to_dict()
        results[st.case.name] = entry

    validation = _validate(cfg, models, {st.case.name: st.region for st in setups})
    validation["cases"] = results
    validation["noise_seed"] = seed
    emit(io.write_json(out / "validation.json", validation))

    if figures:
        for fig, name in _pipeline_figures(cfg, models, setups, noisy_step, clean_step):
            svg, csv_ = fig.write(out / f"{name}.svg")
            emit(svg)
            emit(csv_)
    summary = {"name": cfg.name, "out": str(out), "files": sorted(files + ["summary.json"]),
               "cases": results, "infeasible": infeasible}
    io.write_json(out / "summary.json", summary)
    if infeasible:
        raise InfeasibleError(f"region constraint infeasible for case(s): {', '.join(infeasible)}")
    return summary


def _validate(cfg, models, regions) -> dict:
    """Step 7: compare every model with the true plant in time and frequency."""
    w = bode_grid(cfg.ts)
    g_true = frequency_response(cfg.plant, w)[:, 0, 0]
    y_true = step_response(cfg.plant, cfg.step_test.duration).y[:, 0]
    doc = {"frequency_grid": {"points": int(w.size), "min": float(w[0]), "max": float(w[-1])}, "models": {}}
    for name, m in models.items():
        entry = {"eigenvalues": _eig_rows(m.poles()), "spectral_radius": m.spectral_radius(),
                 "stable": m.spectral_radius() < 1}
        if name != "true":
            g = frequency_response(m, w)[:, 0, 0]
            entry["freq_rel_error"] = float(np.linalg.norm(g - g_true) / np.linalg.norm(g_true))
            entry["step_fit_percent"] = _fit_percent(y_true, step_response(m, cfg.step_test.duration).y[:, 0])
            entry["inside"] = {r: bool(np.all(reg.contains(m.poles(), cfg.solver.verify_tol)))
                               for r, reg in regions.items()}
        doc["models"][name] = entry
    return doc


_MARKERS = ["diamond", "square", "circle", "cross", "plus"]
_CASE_COLORS = ["#2ca02c", "#ff7f0e", "#d62728", "#e377c2", "#17becf", "#7f7f7f"]


def _region_lines(fig, name, region, color, extent=1.1):
    for k, shape in enumerate(region.shapes):
        b = rg.shape_boundary(shape, 361, extent)
        fig.line(f"{name}:{shape['kind']}{k + 1}", b.real, b.imag, color, "6,3")


def _zplane(cfg, title, setups, clouds):
    fig = Figure(title, "Re z", "Im z", equal_aspect=True)
    circ = rg.shape_boundary({"kind": "circle", "c": 0.0, "r": 1.0}, 361)
    fig.line("unit circle", circ.real, circ.imag, "#000000")
    for k, st in enumerate(setups):
        _region_lines(fig, st.case.name, st.region, _CASE_COLORS[k % len(_CASE_COLORS)])
    # true eigenvalues on top
    order = [k for k in clouds if k != "true"] + [k for k in clouds if k == "true"]
    for name in order:
        eig, color, marker = clouds[name]
        eig = np.asarray(eig, dtype=complex)
        fig.markers(name, eig.real, eig.imag, color, marker)
    return fig


def _pipeline_figures(cfg, models, setups, noisy_step, clean_step):
    clouds = {"true": (models["true"].poles(), "#000000", "plus"),
              "unconstrained": (models["unconstrained"].poles(), "#1f77b4", "triangle")}
    for k, st in enumerate(setups):
        if st.case.name in models:
            clouds[st.case.name] = (models[st.case.name].poles(), _CASE_COLORS[k % len(_CASE_COLORS)],
                                    _MARKERS[k % len(_MARKERS)])
    yield _zplane(cfg, f"{cfg.name}: eigenvalues and regions", setups, clouds), "zplane"

    w = bode_grid(cfg.ts)
    bode = Figure(f"{cfg.name}: frequency response magnitude", "w (rad/s)", "|G| (dB)", xlog=True)
    for name, m in models.items():
        g = frequency_response(m, w)[:, 0, 0]
        color = clouds.get(name, (None, None))[1]
        bode.line(name, w, 20 * np.log10(np.abs(g)), color, None if name == "true" else "5,3")
    yield bode, "bode"

    step = Figure(f"{cfg.name}: step test", "t (s)", "y")
    step.line("noisy", noisy_step.t, noisy_step.y[:, 0], "#7f7f7f")
    step.line("noise-free", clean_step.t, clean_step.y[:, 0], "#1f77b4")
    yield step, "step_test"


# Monte Carlo


@dataclass
class MonteCarloReport:
    """Per-run outcomes of a Monte Carlo sweep.

    ``constrained``, ``inside``, ``objective`` and ``status`` map case name to
    one entry per run; ``None`` marks runs where that stage did not produce a
    value. ``bands`` maps model name to normalized step-response
    ``(mean, std)`` over the runs with a stable model.
    """

    seeds: list
    unconstrained: list
    unconstrained_status: list
    constrained: dict
    inside: dict
    objective: dict
    status: dict
    true_eigenvalues: np.ndarray
    step_time: np.ndarray | None = None
    bands: dict = field(default_factory=dict)
    band_counts: dict = field(default_factory=dict)
    regions: dict = field(default_factory=dict)
    setups: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        n = len(self.seeds)
        lengths = [len(self.unconstrained), len(self.unconstrained_status)]
        for d in (self.constrained, self.inside, self.objective, self.status):
            lengths += [len(v) for v in d.values()]
        if any(k != n for k in lengths):
            raise ValueError(f"inconsistent run counts: expected {n}, got {sorted(set(lengths))}")

    @property
    def runs(self) -> int:
        return len(self.seeds)

    @property
    def cases(self) -> list:
        return list(self.status)

    def unconstrained_radii(self) -> list:
        return [None if e is None else float(np.max(np.abs(e))) for e in self.unconstrained]

    def aggregate(self) -> dict:
        radii = [r for r in self.unconstrained_radii() if r is not None]
        doc = {
            "runs": self.runs,
            "unconstrained": {
                "identified": len(radii),
                "failed": self.runs - len(radii),
                "unstable": int(sum(r >= 1 for r in radii)),
                "max_spectral_radius": max(radii) if radii else None,
            },
            "cases": {},
        }
        for case in self.cases:
            st = self.status[case]
            opt = [i for i, s in enumerate(st) if s == "optimal"]
            ins = [self.inside[case][i] for i in opt]
            rad = [float(np.max(np.abs(self.constrained[case][i]))) for i in opt]
            obj = [self.objective[case][i] for i in opt]
            doc["cases"][case] = {
                "optimal": len(opt),
                "infeasible": st.count("infeasible"),
                "max_iterations": st.count("max-iterations"),
                "skipped": st.count("skipped"),
                "failure_fraction": 1 - len(opt) / self.runs,
                "inside_fraction": (sum(ins) / len(ins)) if ins else None,
                "max_spectral_radius": max(rad) if rad else None,
                "objective_mean": float(np.mean(obj)) if obj else None,
                "objective_median": float(np.median(obj)) if obj else None,
            }
        return doc

    def to_dict(self) -> dict:
        return {
            "aggregate": self.aggregate(),
            "seeds": self.seeds,
            "regions": {k: r.to_dict() for k, r in self.regions.items()},
            "band_counts": self.band_counts,
        }


def _mc_run(args):
    cfg, seed, regions = args
    duration = cfg.step_test.duration
    out = {"unconstrained": None, "unconstrained_status": "ok", "cases": {}, "steps": {}}
    try:
        data, _ = identification_data(cfg, seed)
        model = pi_moesp(data.u, data.y, cfg.identification, cfg.ts).model
    except (ValueError, np.linalg.LinAlgError) as exc:
        out["unconstrained_status"] = f"failed: {exc}"
        for name in regions:
            out["cases"][name] = {"status": "skipped", "eig": None, "inside": None, "objective": None}
        return out
    out["unconstrained"] = model.poles()
    out["steps"]["unconstrained"] = _normalized_step(model, duration)
    s = cfg.solver
    for name, region in regions.items():
        sol = solve_constrained(_problem(s, model.a, region))
        if sol.status != "optimal":
            out["cases"][name] = {"status": sol.status, "eig": None, "inside": None, "objective": None}
            continue
        rep = verify_solution(sol, region, model.a, s.verify_tol)
        out["cases"][name] = {"status": "optimal", "eig": rep.eigenvalues,
                              "inside": bool(np.all(rep.inside)), "objective": sol.objective}
        out["steps"][name] = _normalized_step(model.with_a(sol.a_hat), duration)
    return out


def run_montecarlo(cfg: ExperimentConfig, runs: int | None = None, workers: int | None = None,
                   step_record: SignalRecord | None = None) -> MonteCarloReport:
    """Repeat identification and constrained re-estimation over noise realizations.

    Priors and regions come from one step test and are shared by all runs.
    Per-run solver failures are recorded, not raised.
    """
    runs = cfg.runs if runs is None else runs
    workers = cfg.workers if workers is None else workers
    if runs < 1:
        raise ConfigError("run count must be at least 1")
    if step_record is None and any(c.priors.mode == "from-step-test" for c in cfg.cases):
        with _stage("step-test"):
            step_record, _ = step_test(cfg)
    setups = [case_setup(cfg, c, step_record) for c in cfg.cases]
    regions = {st.case.name: st.region for st in setups}
    seeds = run_seeds(cfg, runs)
    jobs = [(cfg, sd, regions) for sd in seeds]
    if workers > 1 and runs > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_mc_run, jobs))
    else:
        results = [_mc_run(j) for j in jobs]

    names = list(regions)
    rep = MonteCarloReport(
        seeds=seeds,
        unconstrained=[r["unconstrained"] for r in results],
        unconstrained_status=[r["unconstrained_status"] for r in results],
        constrained={n: [r["cases"][n]["eig"] for r in results] for n in names},
        inside={n: [r["cases"][n]["inside"] for r in results] for n in names},
        objective={n: [r["cases"][n]["objective"] for r in results] for n in names},
        status={n: [r["cases"][n]["status"] for r in results] for n in names},
        true_eigenvalues=cfg.plant.poles(),
        regions=regions,
        setups=setups,
    )
    rep.step_time = cfg.ts * np.arange(int(math.floor(cfg.step_test.duration / cfg.ts + 1e-9)) + 1)
    for name in ["unconstrained", *names]:
        ys = [r["steps"].get(name) for r in results]
        ys = [y for y in ys if y is not None]
        rep.band_counts[name] = len(ys)
        if ys:
            arr = np.vstack(ys)
            rep.bands[name] = (arr.mean(axis=0), arr.std(axis=0))
    return rep


def write_montecarlo(cfg: ExperimentConfig, rep: MonteCarloReport, out, figures: bool = True) -> list:
    """Eigenvalue, membership and step-band tables (plus SVG overlays)."""
    out = Path(out)
    files = [io.write_json(out / "report.json", rep.to_dict())]
    rows = []
    for i in range(rep.runs):
        for name, eig in [("unconstrained", rep.unconstrained[i])] + \
                [(c, rep.constrained[c][i]) for c in rep.cases]:
            if eig is None:
                continue
            for k, z in enumerate(np.sort_complex(np.asarray(eig))):
                rows.append((i, name, k, float(z.real), float(z.imag), float(abs(z))))
    files.append(io.write_csv(out / "eigenvalues.csv", ["run", "model", "index", "re", "im", "modulus"], rows))

    radii = rep.unconstrained_radii()
    rows = []
    for i in range(rep.runs):
        for c in rep.cases:
            eig = rep.constrained[c][i]
            rows.append((i, rep.seeds[i], c, rep.status[c][i],
                         "" if rep.objective[c][i] is None else rep.objective[c][i],
                         "" if rep.inside[c][i] is None else rep.inside[c][i],
                         "" if eig is None else float(np.max(np.abs(eig))),
                         "" if radii[i] is None else radii[i]))
    files.append(io.write_csv(out / "membership.csv",
                              ["run", "seed", "case", "status", "objective", "inside",
                               "spectral_radius", "unconstrained_spectral_radius"], rows))

    true_step = _normalized_step(cfg.plant, cfg.step_test.duration)
    header = ["t", "true"]
    cols = [rep.step_time, true_step]
    for name, (mean, std) in rep.bands.items():
        header += [f"{name}_mean", f"{name}_std"]
        cols += [mean, std]
    files.append(io.write_csv(out / "step_bands.csv", header, zip(*cols)))

    if figures:
        clouds = {"true": (rep.true_eigenvalues, "#000000", "plus")}
        unc = [e for e in rep.unconstrained if e is not None]
        clouds["unconstrained"] = (np.concatenate(unc) if unc else np.zeros(0), "#1f77b4", "triangle")
        for k, c in enumerate(rep.cases):
            eig = [e for e in rep.constrained[c] if e is not None]
            clouds[c] = (np.concatenate(eig) if eig else np.zeros(0), _CASE_COLORS[k % len(_CASE_COLORS)],
                         _MARKERS[k % len(_MARKERS)])
        fig = _zplane(cfg, f"{cfg.name}: {rep.runs}-run eigenvalues", rep.setups, clouds)
        files += fig.write(out / "zplane.svg")
        sb = Figure(f"{cfg.name}: normalized step responses (mean +/- std)", "t (s)", "y / y_final")
        sb.line("true", rep.step_time, true_step, "#000000")
        colors = {"unconstrained": "#1f77b4", **{c: _CASE_COLORS[k % len(_CASE_COLORS)]
                                                 for k, c in enumerate(rep.cases)}}
        for name, (mean, std) in rep.bands.items():
            sb.band(f"{name} band", rep.step_time, mean - std, mean + std, colors[name])
            sb.line(f"{name} mean", rep.step_time, mean, colors[name], "5,3")
        files += sb.write(out / "step_bands_figure.svg")
    return files


# region gallery


def region_gallery(zetas, ts: float | None = None, wds=(), zeta_wns=(), points: int = 720) -> list:
    """Boundary data for the overshoot approximations, conic sectors and settling disks.

    Returns a list of ``(figure_name, Figure)``; each figure's series hold the
    boundary samples.
    """
    zetas, wds, zeta_wns = list(zetas or ()), list(wds or ()), list(zeta_wns or ())
    if not (zetas or wds or zeta_wns):
        raise ValueError("gallery needs at least one damping ratio, damped frequency or decay rate")
    if (wds or zeta_wns) and not (ts and ts > 0):
        raise ValueError("a positive sampling period is required for conic and settling regions")
    unit = rg.shape_boundary({"kind": "circle", "c": 0.0, "r": 1.0}, points)
    figs = []
    if zetas:
        panels = {
            "circles": ("Cardioids and inner disks", rg.cardioid_circle),
            "inner_ellipses": ("Cardioids and inner ellipses", rg.cardioid_ellipse_inner),
            "conservative_ellipses": ("Cardioids and conservative ellipses", rg.cardioid_ellipse_conservative),
        }
        for key, (title, ctor) in panels.items():
            fig = Figure(title, "Re z", "Im z", equal_aspect=True)
            fig.line("unit circle", unit.real, unit.imag, "#000000")
            for k, zeta in enumerate(zetas):
                color = _CASE_COLORS[k % len(_CASE_COLORS)]
                card = rg.cardioid_boundary(zeta, points)
                fig.line(f"cardioid zeta={zeta:g}", card.real, card.imag, color)
                region, _ = ctor(zeta)
                b = rg.shape_boundary(region.shapes[0], points)
                fig.line(f"{key[:-1].replace('_', ' ')} zeta={zeta:g}", b.real, b.imag, color, "6,3")
            figs.append((key, fig))
    if wds or zeta_wns:
        fig = Figure(f"Conic sectors and settling disks (Ts={ts:g} s)", "Re z", "Im z", equal_aspect=True)
        fig.line("unit circle", unit.real, unit.imag, "#000000")
        for k, wd in enumerate(wds):
            b = rg.shape_boundary(rg.conic_region(wd * ts).shapes[0], points, 1.0)
            fig.line(f"conic wd={wd:g}", b.real, b.imag, _CASE_COLORS[k % len(_CASE_COLORS)])
        for k, zw in enumerate(zeta_wns):
            b = rg.shape_boundary(rg.settling_circle(zw, ts)[0].shapes[0], points)
            fig.line(f"settling zeta_wn={zw:g}", b.real, b.imag, _CASE_COLORS[(k + 3) % len(_CASE_COLORS)], "6,3")
        figs.append(("conic_settling", fig))
    return figs
