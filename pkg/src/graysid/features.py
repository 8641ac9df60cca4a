"""Step-response feature extraction and the mapping from features to priors."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.ndimage
import scipy.signal

from . import regions as rg
from .lti import SignalRecord

__all__ = [
    "FeatureConfig",
    "Extremum",
    "StepFeatures",
    "PriorEstimates",
    "BoundedPriors",
    "extract_features",
    "priors_from_features",
    "aggregate_priors",
    "apply_tuning",
    "regions_from_priors",
]


@dataclass
class FeatureConfig:
    """Knobs for :func:`extract_features`.

    ``window`` is the moving-average length in samples (``None`` picks
    ``max(3, N // 100)``). ``prominence`` and ``settle_band`` are fractions of
    the step size. ``selector`` is ``"half"`` (first peak to first valley) or
    ``"full"`` (first peak to second peak). ``extrema`` bypasses detection with
    explicit ``(sample_index, kind)`` pairs; ``period_extrema`` and
    ``overshoot_extremum`` pick entries of the extrema list by position.
    ``interpolate`` refines each extremum with a parabola through the sample
    and its two neighbours.
    """

    window: int | None = None
    prominence: float = 0.02
    settle_band: float = 0.01
    final_fraction: float = 0.1
    selector: str = "half"
    extrema: list | None = None
    period_extrema: tuple | None = None
    overshoot_extremum: int | None = None
    interpolate: bool = True

    @classmethod
    def from_dict(cls, obj: dict | None) -> "FeatureConfig":
        obj = dict(obj or {})
        if obj.get("extrema") is not None:
            obj["extrema"] = [tuple(e) for e in obj["extrema"]]
        if obj.get("period_extrema") is not None:
            obj["period_extrema"] = tuple(obj["period_extrema"])
        return cls(**obj)


@dataclass(frozen=True)
class Extremum:
    index: int
    time: float
    value: float
    kind: str  # "peak" or "valley"


@dataclass
class StepFeatures:
    os: float | None
    td: float | None
    ts1: float | None
    tr: float | None
    tp: float | None
    y0: float
    y_final: float
    extrema: list = field(default_factory=list)
    provenance: dict = field(default_factory=dict)

    @property
    def tau(self):
        """Time constant ``1 / (zeta wn)`` implied by the 1% settling time."""
        return None if self.ts1 is None else self.ts1 / 4.6

    def to_dict(self) -> dict:
        d = asdict(self)
        d["extrema"] = [asdict(e) for e in self.extrema]
        return d


@dataclass
class PriorEstimates:
    zeta: float | None = None
    wd: float | None = None
    zeta_wn: float | None = None
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.zeta is not None and not 0 < self.zeta < 1:
            raise ValueError(f"damping-ratio estimate must lie in (0, 1), got {self.zeta}")
        if self.wd is not None and not self.wd > 0:
            raise ValueError(f"damped-frequency estimate must be positive, got {self.wd}")
        if self.zeta_wn is not None and not self.zeta_wn > 0:
            raise ValueError(f"decay-rate estimate must be positive, got {self.zeta_wn}")


@dataclass
class BoundedPriors:
    zeta_min: float | None
    wd_max: float | None
    zeta_wn_min: float | None
    delta_zeta: float = 0.0
    delta_wd: float = 0.0
    delta_zeta_wn: float = 0.0


def _moving_average(y, window):
    if window <= 1:
        return y.copy()
    return scipy.ndimage.uniform_filter1d(y, size=window, mode="nearest")


def _detect_extrema(yn, window, prominence):
    smooth = _moving_average(yn, window)
    half = window // 2
    found = []
    for kind, sign in (("peak", 1.0), ("valley", -1.0)):
        idx, _ = scipy.signal.find_peaks(sign * smooth, prominence=prominence)
        for i in idx:
            # locate the extremum on the raw record near the smoothed one
            lo, hi = max(0, i - half), min(yn.size, i + half + 1)
            j = lo + int(np.argmax(sign * yn[lo:hi]))
            found.append((j, kind))
    found.sort()
    out = []
    for j, kind in found:
        if out and out[-1][0] == j:
            continue
        out.append((j, kind))
    return out


def _refine(t, y, i):
    """Vertex of the parabola through samples ``i - 1, i, i + 1``."""
    if i <= 0 or i >= y.size - 1:
        return float(t[i]), float(y[i])
    ym, y0, yp = y[i - 1], y[i], y[i + 1]
    curv = ym - 2 * y0 + yp
    if curv == 0:
        return float(t[i]), float(y0)
    delta = float(np.clip(0.5 * (ym - yp) / curv, -0.5, 0.5))
    dt = t[i + 1] - t[i]
    return float(t[i] + delta * dt), float(y0 - 0.25 * (ym - yp) * delta)


def _rise_time(t, yn):
    above10 = np.flatnonzero(yn >= 0.1)
    above90 = np.flatnonzero(yn >= 0.9)
    if above10.size == 0 or above90.size == 0:
        return None
    return float(t[above90[0]] - t[above10[0]])


def extract_features(signal, config: FeatureConfig | None = None, output: int = 0) -> StepFeatures:
    """Overshoot, damped period and 1% settling time of a step response.

    ``signal`` is a :class:`SignalRecord` or a ``(t, y)`` pair. Overshoot and
    period are ``None`` when no suitable extrema are found (overdamped
    response); the settling time is always reported.
    """
    cfg = config or FeatureConfig()
    if isinstance(signal, SignalRecord):
        t = signal.t
        y = signal.y[:, output]
    else:
        t, y = (np.asarray(v, dtype=float) for v in signal)
    N = y.size
    if N < 2:
        raise ValueError("step response needs at least two samples")

    n_final = max(1, int(round(cfg.final_fraction * N)))
    y0 = float(y[0])
    y_final = float(np.mean(y[-n_final:]))
    step = y_final - y0
    prov = {"n_final": n_final}

    if step == 0:
        return StepFeatures(0.0, None, float(t[0]), None, None, y0, y_final, [], prov)

    yn = (y - y0) / step
    window = cfg.window if cfg.window is not None else max(3, N // 100)
    prov["window"] = window

    if cfg.extrema is not None:
        marks = [(int(i), str(k)) for i, k in cfg.extrema]
        prov["extrema_source"] = "explicit"
    else:
        marks = _detect_extrema(yn, window, cfg.prominence)
        prov["extrema_source"] = "detected"
    extrema = []
    for i, k in marks:
        ti, vi = _refine(t, y, i) if cfg.interpolate else (float(t[i]), float(y[i]))
        extrema.append(Extremum(i, ti, vi, k))
    for e in extrema:
        if e.kind not in ("peak", "valley"):
            raise ValueError(f"extremum kind must be 'peak' or 'valley', got {e.kind!r}")

    peaks = [n for n, e in enumerate(extrema) if e.kind == "peak"]

    os_ = tp = None
    k_os = cfg.overshoot_extremum if cfg.overshoot_extremum is not None else (peaks[0] if peaks else None)
    if k_os is not None:
        e = extrema[k_os]
        os_ = max(0.0, 100.0 * ((e.value - y0) / step - 1.0))
        tp = e.time - float(t[0])
        prov["overshoot"] = k_os
    else:
        os_ = 0.0

    td = None
    pair = cfg.period_extrema
    if pair is None and peaks:
        first = peaks[0]
        if cfg.selector == "half":
            later = [n for n in range(first + 1, len(extrema)) if extrema[n].kind == "valley"]
            pair = (first, later[0]) if later else None
        elif cfg.selector == "full":
            pair = (first, peaks[1]) if len(peaks) > 1 else None
        else:
            raise ValueError(f"unknown selector {cfg.selector!r}")
    if pair is not None:
        e1, e2 = extrema[pair[0]], extrema[pair[1]]
        dt = abs(e2.time - e1.time)
        td = 2 * dt if e1.kind != e2.kind else dt
        prov["period"] = list(pair)
        if not td > 0:
            td = None

    outside = np.flatnonzero(np.abs(yn - 1.0) > cfg.settle_band)
    if outside.size == 0:
        ts1 = 0.0
    elif outside[-1] + 1 < N:
        ts1 = float(t[outside[-1] + 1] - t[0])
    else:
        ts1 = None  # never settles inside the record

    return StepFeatures(os_, td, ts1, _rise_time(t, yn), tp, y0, y_final, extrema, prov)


def priors_from_features(features: StepFeatures, exact: bool = False) -> PriorEstimates:
    """Damping ratio, damped frequency and decay rate implied by step features.

    The damping ratio uses the linear rule ``zeta = 0.6 (1 - Os/100)``; with
    ``exact=True`` it uses the logarithmic-decrement formula instead.
    Features that are missing leave the matching estimate as ``None``.
    """
    zeta = wd = zeta_wn = None
    prov = {}
    if features.os is not None:
        if features.os >= 100:
            raise ValueError(f"overshoot {features.os:.2f}% >= 100% gives a nonpositive damping ratio")
        if exact:
            if features.os > 0:
                ld = -math.log(features.os / 100)
                zeta = ld / math.hypot(math.pi, ld)
        else:
            zeta = 0.6 * (1 - features.os / 100)
        prov["zeta"] = features.provenance.get("overshoot")
    if features.td is not None:
        wd = 2 * math.pi / features.td
        prov["wd"] = features.provenance.get("period")
    if features.ts1 is not None and features.ts1 > 0:
        zeta_wn = 4.6 / features.ts1
        prov["zeta_wn"] = "settling"
    if zeta is None and wd is None and zeta_wn is None:
        raise ValueError("no usable feature: overshoot, period and settling time are all missing")
    return PriorEstimates(zeta, wd, zeta_wn, prov)


def aggregate_priors(estimates, rule: str = "std"):
    """Average several prior estimates.

    Returns ``(mean, spread)`` where ``spread`` maps field name to the sample
    standard deviation (``rule="std"``) or the range ``max - min``
    (``rule="range"``, which is ``|x1 - x2|`` for a pair).
    """
    estimates = list(estimates)
    if not estimates:
        raise ValueError("need at least one estimate")
    mean, spread = {}, {}
    for name in ("zeta", "wd", "zeta_wn"):
        vals = np.array([getattr(e, name) for e in estimates if getattr(e, name) is not None])
        if vals.size == 0:
            mean[name], spread[name] = None, None
            continue
        mean[name] = float(vals.mean())
        if vals.size == 1:
            spread[name] = 0.0
        elif rule == "std":
            spread[name] = float(vals.std(ddof=1))
        elif rule == "range":
            spread[name] = float(vals.max() - vals.min())
        else:
            raise ValueError(f"unknown spread rule {rule!r}")
    return PriorEstimates(**mean, provenance={"aggregated": len(estimates), "rule": rule}), spread


def apply_tuning(priors: PriorEstimates, delta_zeta: float = 0.0, delta_wd: float = 0.0,
                 delta_zeta_wn: float = 0.0, ts: float | None = None) -> BoundedPriors:
    """Widen the priors into conservative bounds.

    ``zeta_min = zeta - delta_zeta``, ``wd_max = wd + delta_wd`` and
    ``zeta_wn_min = zeta_wn - delta_zeta_wn``. With ``ts`` given, ``wd_max``
    must stay below a quarter of the sampling frequency.
    """
    if min(delta_zeta, delta_wd, delta_zeta_wn) < 0:
        raise ValueError("tuning deltas must be nonnegative")
    zeta_min = wd_max = zeta_wn_min = None
    if priors.zeta is not None:
        zeta_min = priors.zeta - delta_zeta
        if not 0 < zeta_min < 1:
            raise ValueError(f"zeta_min = {zeta_min:g} is outside (0, 1); reduce delta_zeta")
    if priors.wd is not None:
        wd_max = priors.wd + delta_wd
        if ts is not None and not wd_max < math.pi / (2 * ts):
            raise ValueError(
                f"wd_max = {wd_max:g} rad/s is not below ws/4 = {math.pi / (2 * ts):g} rad/s")
    if priors.zeta_wn is not None:
        zeta_wn_min = priors.zeta_wn - delta_zeta_wn
        if not zeta_wn_min > 0:
            raise ValueError(f"zeta_wn_min = {zeta_wn_min:g} must be positive")
    return BoundedPriors(zeta_min, wd_max, zeta_wn_min, delta_zeta, delta_wd, delta_zeta_wn)


_OVERSHOOT = {
    "conservative": rg.cardioid_ellipse_conservative,
    "inner": rg.cardioid_ellipse_inner,
    "circle": rg.cardioid_circle,
}


def regions_from_priors(bounded: BoundedPriors, ts: float, overshoot: str | None = None,
                        conic: bool = False, settling: bool = False,
                        stability: bool = False) -> rg.LmiRegion:
    """Build the selected regions and intersect them.

    ``overshoot`` picks the cardioid approximation (``"conservative"``,
    ``"inner"`` or ``"circle"``); ``conic`` adds the sector with
    ``theta_max = wd_max * ts``; ``settling`` adds the decay-rate disk;
    ``stability`` adds the unit disk.
    """
    parts = []
    if overshoot:
        if overshoot not in _OVERSHOOT:
            raise ValueError(f"unknown overshoot region {overshoot!r}")
        if bounded.zeta_min is None:
            raise ValueError("overshoot region requested but no damping-ratio prior available")
        parts.append(_OVERSHOOT[overshoot](bounded.zeta_min)[0])
    if conic:
        if bounded.wd_max is None:
            raise ValueError("conic region requested but no damped-frequency prior available")
        parts.append(rg.conic_region(bounded.wd_max * ts))
    if settling:
        if bounded.zeta_wn_min is None:
            raise ValueError("settling region requested but no settling-time prior available")
        parts.append(rg.settling_circle(bounded.zeta_wn_min, ts)[0])
    if stability:
        parts.append(rg.stability_circle())
    if not parts:
        raise ValueError("no region selected")
    return rg.intersect(parts)
