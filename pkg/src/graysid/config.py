"""Versioned JSON experiment configuration."""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .features import FeatureConfig
from .io import read_model
from .lti import DiscreteStateSpace, TransferFunction, c2d_zoh, tf_to_ss
from .subspace import HankelConfig

__all__ = [
    "SCHEMA_VERSION",
    "ConfigError",
    "ExcitationSpec",
    "NoiseSpec",
    "StepTestSpec",
    "PriorSpec",
    "TuningSpec",
    "RegionFlags",
    "SolverSpec",
    "CaseSpec",
    "ExperimentConfig",
    "load_config",
    "builtin_configs",
]

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Invalid or inconsistent experiment configuration."""


def _keys(obj, allowed, where):
    if not isinstance(obj, dict):
        raise ConfigError(f"{where}: expected an object, got {type(obj).__name__}")
    extra = sorted(set(obj) - set(allowed) - {"description"})
    if extra:
        raise ConfigError(f"{where}: unknown keys {extra}")


def _positive(value, where, integer=False):
    kind = int if integer else (int, float)
    if isinstance(value, bool) or not isinstance(value, kind) or not value > 0:
        raise ConfigError(f"{where} must be a positive {'integer' if integer else 'number'}, got {value!r}")
    return value


@dataclass(frozen=True)
class ExcitationSpec:
    bits: int = 16
    hold: int = 100
    amplitude: float = 1.0
    duration: float = 40.0
    seed: int = 0

    @classmethod
    def from_dict(cls, obj):
        _keys(obj, {"bits", "hold", "amplitude", "duration", "seed"}, "excitation")
        spec = cls(**obj)
        _positive(spec.bits, "excitation.bits", integer=True)
        _positive(spec.hold, "excitation.hold", integer=True)
        _positive(spec.amplitude, "excitation.amplitude")
        _positive(spec.duration, "excitation.duration")
        if not 2 <= spec.bits <= 32:
            raise ConfigError(f"excitation.bits must lie in [2, 32], got {spec.bits}")
        return spec


@dataclass(frozen=True)
class NoiseSpec:
    """Output noise: white Gaussian ``sigma`` through the filter ``num/den``.

    ``seed_policy`` is ``"spawn"`` (per-run seeds derived from the master
    seed) or ``"fixed"`` (every run reuses ``seed``).
    """

    num: tuple = (1.0,)
    den: tuple = (1.0,)
    sigma: float = 1.0
    burn_in: int = 0
    seed_policy: str = "spawn"
    seed: int = 0

    @classmethod
    def from_dict(cls, obj):
        _keys(obj, {"num", "den", "sigma", "burn_in", "seed_policy", "seed"}, "noise")
        obj = dict(obj)
        for k in ("num", "den"):
            if k in obj:
                obj[k] = tuple(float(v) for v in obj[k])
        spec = cls(**obj)
        if spec.sigma < 0:
            raise ConfigError("noise.sigma must be nonnegative")
        if spec.burn_in < 0:
            raise ConfigError("noise.burn_in must be nonnegative")
        if spec.seed_policy not in ("spawn", "fixed"):
            raise ConfigError(f"noise.seed_policy must be 'spawn' or 'fixed', got {spec.seed_policy!r}")
        try:
            spec.filter
        except ValueError as exc:
            raise ConfigError(f"noise filter: {exc}") from exc
        return spec

    @property
    def filter(self) -> TransferFunction:
        return TransferFunction(list(self.num), list(self.den))


@dataclass(frozen=True)
class StepTestSpec:
    """Step experiment used for prior extraction.

    The output is corrupted by the identification noise filter, scaled so
    that ``10 log10(var(clean) / var(noise)) = snr_db``; ``snr_db = None``
    gives a noise-free test.
    """

    duration: float = 40.0
    snr_db: float | None = 5.0
    seed: int = 2024
    amplitude: float = 1.0

    @classmethod
    def from_dict(cls, obj):
        _keys(obj, {"duration", "snr_db", "seed", "amplitude"}, "step_test")
        spec = cls(**obj)
        _positive(spec.duration, "step_test.duration")
        _positive(spec.amplitude, "step_test.amplitude")
        return spec


@dataclass(frozen=True)
class PriorSpec:
    """Where the priors come from.

    ``mode="from-step-test"`` extracts them from the simulated step test;
    ``mode="given"`` takes a list of estimates (each with any of ``zeta``,
    ``wd``, ``zeta_wn``), averaged with ``spread_rule`` when there are several.
    """

    mode: str = "from-step-test"
    estimates: tuple = ()
    spread_rule: str = "std"
    features: dict | None = None

    @classmethod
    def from_dict(cls, obj, where="priors"):
        _keys(obj, {"mode", "estimates", "spread_rule", "features"}, where)
        obj = dict(obj)
        obj["estimates"] = tuple(dict(e) for e in obj.get("estimates", ()))
        spec = cls(**obj)
        if spec.mode not in ("from-step-test", "given"):
            raise ConfigError(f"{where}.mode must be 'from-step-test' or 'given', got {spec.mode!r}")
        if spec.mode == "given" and not spec.estimates:
            raise ConfigError(f"{where}: mode 'given' needs at least one estimate")
        for i, e in enumerate(spec.estimates):
            _keys(e, {"zeta", "wd", "zeta_wn"}, f"{where}.estimates[{i}]")
        if spec.spread_rule not in ("std", "range"):
            raise ConfigError(f"{where}.spread_rule must be 'std' or 'range'")
        if spec.features is not None:
            try:
                FeatureConfig.from_dict(spec.features)
            except TypeError as exc:
                raise ConfigError(f"{where}.features: {exc}") from exc
        return spec


@dataclass(frozen=True)
class TuningSpec:
    """Tuning deltas; ``from_spread`` replaces them by the estimate spread."""

    delta_zeta: float = 0.0
    delta_wd: float = 0.0
    delta_zeta_wn: float = 0.0
    from_spread: bool = False

    @classmethod
    def from_dict(cls, obj, where="tuning"):
        _keys(obj, {"delta_zeta", "delta_wd", "delta_zeta_wn", "from_spread"}, where)
        spec = cls(**obj)
        if min(spec.delta_zeta, spec.delta_wd, spec.delta_zeta_wn) < 0:
            raise ConfigError(f"{where}: deltas must be nonnegative")
        return spec


@dataclass(frozen=True)
class RegionFlags:
    overshoot: str | None = None
    conic: bool = False
    settling: bool = False
    stability: bool = False

    @classmethod
    def from_dict(cls, obj, where="regions"):
        _keys(obj, {"overshoot", "conic", "settling", "stability"}, where)
        spec = cls(**obj)
        if spec.overshoot not in (None, "conservative", "inner", "circle"):
            raise ConfigError(f"{where}.overshoot must be conservative, inner, circle or null")
        return spec

    @property
    def any(self) -> bool:
        return bool(self.overshoot or self.conic or self.settling or self.stability)


@dataclass(frozen=True)
class SolverSpec:
    name: str = "CLARABEL"
    p_min: float = 1.0
    margin: float = 0.0
    p_max: float | None = None
    tol_feas: float = 1e-8
    tol_gap: float = 1e-8
    max_iter: int = 200
    verify_tol: float = 1e-6

    @classmethod
    def from_dict(cls, obj):
        _keys(obj, {"name", "p_min", "margin", "p_max", "tol_feas", "tol_gap", "max_iter", "verify_tol"}, "solver")
        spec = cls(**obj)
        _positive(spec.p_min, "solver.p_min")
        _positive(spec.max_iter, "solver.max_iter", integer=True)
        if spec.margin < 0:
            raise ConfigError("solver.margin must be nonnegative")
        if spec.p_max is not None and not spec.p_max > spec.p_min:
            raise ConfigError("solver.p_max must exceed solver.p_min")
        return spec


@dataclass(frozen=True)
class CaseSpec:
    name: str
    priors: PriorSpec
    tuning: TuningSpec
    regions: RegionFlags


@dataclass
class ExperimentConfig:
    name: str
    ts: float
    plant: DiscreteStateSpace
    plant_source: dict
    excitation: ExcitationSpec
    noise: NoiseSpec | None
    identification: HankelConfig
    step_test: StepTestSpec
    features: FeatureConfig
    cases: list
    solver: SolverSpec
    runs: int = 100
    seed: int = 0
    workers: int = 1
    out: str | None = None
    raw: dict = field(default_factory=dict, repr=False)

    @property
    def samples(self) -> int:
        return int(math.ceil(self.excitation.duration / self.ts - 1e-9))

    @classmethod
    def from_dict(cls, obj: dict, base_dir=None) -> "ExperimentConfig":
        if not isinstance(obj, dict):
            raise ConfigError("configuration must be a JSON object")
        raw = copy.deepcopy(obj)
        _keys(obj, {"version", "name", "ts", "plant", "excitation", "noise", "identification",
                    "step_test", "features", "priors", "tuning", "regions", "cases", "solver",
                    "montecarlo", "seed", "out"}, "config")
        version = obj.get("version")
        if version != SCHEMA_VERSION:
            raise ConfigError(f"unsupported config version {version!r}; expected {SCHEMA_VERSION}")
        ts = _positive(obj.get("ts"), "ts")
        plant, source = _plant(obj.get("plant"), ts, base_dir)
        try:
            excitation = ExcitationSpec.from_dict(obj.get("excitation", {}))
            noise = None if obj.get("noise") is None else NoiseSpec.from_dict(obj["noise"])
            ident = obj.get("identification", {})
            _keys(ident, {"past", "future", "order", "threshold", "detrend"}, "identification")
            identification = HankelConfig(**ident)
            step = StepTestSpec.from_dict(obj.get("step_test", {}))
            feats = FeatureConfig.from_dict(obj.get("features"))
            solver = SolverSpec.from_dict(obj.get("solver", {}))
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from exc

        defaults = {k: obj.get(k, {}) for k in ("priors", "tuning", "regions")}
        case_objs = obj.get("cases") or [{"name": "constrained"}]
        cases, names = [], set()
        for i, c in enumerate(case_objs):
            where = f"cases[{i}]"
            _keys(c, {"name", "priors", "tuning", "regions"}, where)
            name = c.get("name", f"case{i + 1}")
            if name in names or name == "unconstrained":
                raise ConfigError(f"{where}: duplicate or reserved case name {name!r}")
            names.add(name)
            merged = {k: {**defaults[k], **c.get(k, {})} for k in defaults}
            cases.append(CaseSpec(
                name,
                PriorSpec.from_dict(merged["priors"], f"{where}.priors"),
                TuningSpec.from_dict(merged["tuning"], f"{where}.tuning"),
                RegionFlags.from_dict(merged["regions"], f"{where}.regions"),
            ))

        mc = obj.get("montecarlo", {})
        _keys(mc, {"runs", "workers"}, "montecarlo")
        runs = mc.get("runs", 100)
        workers = mc.get("workers", 1)
        _positive(runs, "montecarlo.runs", integer=True)
        _positive(workers, "montecarlo.workers", integer=True)
        seed = obj.get("seed", 0)
        if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
            raise ConfigError(f"seed must be a nonnegative integer, got {seed!r}")
        cfg = cls(obj.get("name", "experiment"), float(ts), plant, source, excitation, noise,
                  identification, step, feats, cases, solver, runs, seed, workers, obj.get("out"), raw)
        if cfg.samples < 2:
            raise ConfigError("excitation.duration is shorter than two samples")
        return cfg

    def with_overrides(self, seed=None, runs=None, out=None, workers=None) -> "ExperimentConfig":
        cfg = copy.copy(self)
        if seed is not None:
            if seed < 0:
                raise ConfigError("seed must be nonnegative")
            cfg.seed = seed
        if runs is not None:
            if runs < 1:
                raise ConfigError("run count must be at least 1")
            cfg.runs = runs
        if workers is not None:
            if workers < 1:
                raise ConfigError("worker count must be at least 1")
            cfg.workers = workers
        if out is not None:
            cfg.out = str(out)
        return cfg


def _plant(obj, ts, base_dir):
    if not isinstance(obj, dict):
        raise ConfigError("plant must be an object with 'num'/'den' or 'model_file'")
    _keys(obj, {"num", "den", "model_file"}, "plant")
    if "model_file" in obj:
        path = Path(obj["model_file"])
        if not path.is_absolute() and base_dir is not None:
            path = Path(base_dir) / path
        if not path.is_file():
            raise ConfigError(f"plant model file not found: {path}")
        try:
            model = read_model(path, ts)
        except (KeyError, ValueError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read plant model {path}: {exc}") from exc
        if abs(model.ts - ts) > 1e-12 * ts:
            raise ConfigError(f"plant model sampled at {model.ts} s but config ts is {ts} s")
        return model, {"model_file": str(path)}
    try:
        tf = TransferFunction(obj["num"], obj["den"])
        return c2d_zoh(tf_to_ss(tf), ts), {"num": list(tf.num), "den": list(tf.den)}
    except KeyError as exc:
        raise ConfigError(f"plant is missing {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"plant: {exc}") from exc


def builtin_configs() -> list[str]:
    root = resources.files("graysid") / "configs"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_config(path_or_name) -> ExperimentConfig:
    """Load a config file, or a shipped config by name.

    Shipped names: ``second_order``, ``second_order_priors`` and ``fourth_order``.
    """
    path = Path(path_or_name)
    if path.is_file():
        text, base = path.read_text(), path.parent
    else:
        name = str(path_or_name)
        name = name[:-5] if name.endswith(".json") else name
        res = resources.files("graysid") / "configs" / f"{name}.json"
        if "/" in name or not res.is_file():
            raise ConfigError(f"config not found: {path_or_name}")
        text, base = res.read_text(), None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path_or_name}: invalid JSON: {exc}") from exc
    return ExperimentConfig.from_dict(obj, base)
