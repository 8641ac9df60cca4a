"""LMI eigenvalue regions on the z-plane.

An LMI region is the set ``{z : lam + beta z + beta^T conj(z) >= 0}``. The
constructors below cover the overshoot (cardioid) approximations, the conic
sector for the damped frequency, and disks for settling time and stability.
Every region also carries a list of ``shapes``: plain geometric descriptions
of its members, used for plotting boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.optimize

__all__ = [
    "LmiRegion",
    "CircleParams",
    "EllipseParams",
    "DEFAULT_TOL",
    "char_fn_eval",
    "contains",
    "cardioid_circle",
    "cardioid_ellipse_inner",
    "cardioid_ellipse_conservative",
    "conic_region",
    "settling_circle",
    "stability_circle",
    "circle_region",
    "ellipse_region",
    "intersect",
    "critical_zeta",
    "zplane_coords",
    "exact_cardioid_contains",
    "cardioid_boundary",
    "shape_boundary",
]

DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class LmiRegion:
    lam: np.ndarray
    beta: np.ndarray
    label: str = ""
    shapes: tuple = field(default=(), compare=False)

    def __post_init__(self):
        lam = np.atleast_2d(np.asarray(self.lam, dtype=float))
        beta = np.atleast_2d(np.asarray(self.beta, dtype=float))
        m = lam.shape[0]
        if lam.shape != (m, m) or beta.shape != (m, m):
            raise ValueError(f"lambda and beta must both be square of the same size, got {lam.shape}, {beta.shape}")
        if not np.allclose(lam, lam.T, rtol=0, atol=1e-12):
            raise ValueError("lambda must be symmetric")
        object.__setattr__(self, "lam", 0.5 * (lam + lam.T))
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "shapes", tuple(self.shapes))

    @property
    def size(self) -> int:
        return self.lam.shape[0]

    def char_fn(self, z: complex) -> np.ndarray:
        return char_fn_eval(self, z)

    def min_eig(self, z) -> np.ndarray:
        """Smallest eigenvalue of the characteristic function at each point of ``z``."""
        z = np.asarray(z, dtype=complex)
        x = z.real.reshape(-1, 1, 1)
        y = z.imag.reshape(-1, 1, 1)
        m = self.size
        sym = self.beta + self.beta.T
        skew = self.beta - self.beta.T
        re = self.lam + sym * x
        im = skew * y
        # symmetric real embedding of the Hermitian matrix re + j im
        emb = np.empty((z.size, 2 * m, 2 * m))
        emb[:, :m, :m] = re
        emb[:, m:, m:] = re
        emb[:, :m, m:] = -im
        emb[:, m:, :m] = im
        return np.linalg.eigvalsh(emb)[:, 0].reshape(z.shape)

    def contains(self, z, tol: float = DEFAULT_TOL):
        inside = self.min_eig(z) >= -tol
        return bool(inside) if np.ndim(inside) == 0 else inside

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "lambda": self.lam.tolist(),
            "beta": self.beta.tolist(),
            "shapes": [dict(s) for s in self.shapes],
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "LmiRegion":
        return cls(obj["lambda"], obj["beta"], obj.get("label", ""), tuple(obj.get("shapes", ())))


@dataclass(frozen=True)
class CircleParams:
    c: float
    r: float


@dataclass(frozen=True)
class EllipseParams:
    """Ellipse centred at ``c`` on the real axis with semi-axes ``a`` (real) and ``b``.

    ``e = 1/a`` and ``f = 1/b`` are the LMI coefficients. ``mu`` is the
    rescaling factor of the conservative variant (1 for the inner ellipse).
    """

    c: float
    a: float
    b: float
    e: float
    f: float
    mu: float = 1.0

    def polar_radius(self, angle):
        """Distance from the centre to the boundary at ``angle`` from the real axis."""
        s, co = np.sin(angle), np.cos(angle)
        return self.a * self.b / np.sqrt(self.a**2 * s**2 + self.b**2 * co**2)


def char_fn_eval(region: LmiRegion, z: complex) -> np.ndarray:
    """``lam + beta z + beta^T conj(z)`` as a complex Hermitian matrix."""
    z = complex(z)
    return region.lam + region.beta * z + region.beta.T * z.conjugate()


def contains(region: LmiRegion, z, tol: float = DEFAULT_TOL):
    return region.contains(z, tol)


def _check_zeta(zeta_min):
    if not 0 < zeta_min < 1:
        raise ValueError(f"zeta_min must lie in (0, 1) (underdamped), got {zeta_min}")


def _cardioid_circle_params(zeta_min):
    beta = math.acos(zeta_min)
    g = math.exp(-beta / math.tan(beta))
    return beta, g * math.cos(beta), g * math.sin(beta)


def circle_region(c: float, r: float, label: str = "") -> LmiRegion:
    """Disk ``|z - c| <= r``."""
    if not r > 0:
        raise ValueError(f"radius must be positive, got {r}")
    lam = [[r, -c], [-c, r]]
    beta = [[0.0, 1.0], [0.0, 0.0]]
    return LmiRegion(lam, beta, label or f"circle(c={c:g}, r={r:g})",
                     ({"kind": "circle", "c": float(c), "r": float(r)},))


def ellipse_region(p: EllipseParams, label: str = "") -> LmiRegion:
    e, f, c = p.e, p.f, p.c
    lam = [[1.0, -e * c], [-e * c, 1.0]]
    beta = [[0.0, (e - f) / 2], [(e + f) / 2, 0.0]]
    return LmiRegion(lam, beta, label or f"ellipse(c={c:g}, a={p.a:g}, b={p.b:g})",
                     ({"kind": "ellipse", "c": float(c), "a": float(p.a), "b": float(p.b)},))


def cardioid_circle(zeta_min: float):
    """Inner disk approximation of the constant-damping cardioid.

    Returns ``(region, CircleParams)``.
    """
    _check_zeta(zeta_min)
    _, c, r = _cardioid_circle_params(zeta_min)
    params = CircleParams(c, r)
    return circle_region(c, r, f"cardioid-circle(zeta_min={zeta_min:g})"), params


def _inner_ellipse_params(zeta_min):
    beta, c, r = _cardioid_circle_params(zeta_min)
    a = c + math.exp(-math.pi / math.tan(beta))
    return EllipseParams(c=c, a=a, b=r, e=1 / a, f=1 / r)


def cardioid_ellipse_inner(zeta_min: float):
    """Ellipse spanning the cardioid's leftmost point, centred on the inner disk."""
    _check_zeta(zeta_min)
    p = _inner_ellipse_params(zeta_min)
    return ellipse_region(p, f"cardioid-ellipse(zeta_min={zeta_min:g})"), p


def cardioid_ellipse_conservative(zeta_min: float):
    """Inner ellipse rescaled so its rightmost point sits on ``z = 1``.

    Centre and real semi-axis are multiplied by ``mu = 1 / (a + c)``; the
    imaginary semi-axis is unchanged.
    """
    _check_zeta(zeta_min)
    p = _inner_ellipse_params(zeta_min)
    mu = 1 / (p.a + p.c)
    a_n = p.a * mu
    c_n = p.c * mu
    q = EllipseParams(c=c_n, a=a_n, b=p.b, e=1 / a_n, f=p.f, mu=mu)
    return ellipse_region(q, f"conservative-ellipse(zeta_min={zeta_min:g})"), q


def conic_region(theta_max: float) -> LmiRegion:
    """Sector ``tan(theta_max) Re z >= |Im z|`` with apex at the origin."""
    if not theta_max > 0:
        raise ValueError(f"theta_max must be positive, got {theta_max}")
    if theta_max > math.pi / 2 + 1e-12:
        raise ValueError(
            f"theta_max = {theta_max:g} rad exceeds pi/2: the sector is not convex. "
            "Sample at least four times per damped period (Ts <= Td_max / 4)."
        )
    s, c = math.sin(theta_max), math.cos(theta_max)
    beta = [[s, -c], [c, s]]
    return LmiRegion(np.zeros((2, 2)), beta, f"conic(theta_max={theta_max:g})",
                     ({"kind": "conic", "theta": float(theta_max)},))


def settling_circle(zeta_wn_min: float, ts: float):
    """Disk centred at the origin with radius ``exp(-zeta_wn_min * ts)``."""
    if not zeta_wn_min > 0:
        raise ValueError(f"zeta_wn_min must be positive, got {zeta_wn_min}")
    if not ts > 0:
        raise ValueError(f"sampling period must be positive, got {ts}")
    r = math.exp(-zeta_wn_min * ts)
    region = circle_region(0.0, r, f"settling-circle(zeta_wn_min={zeta_wn_min:g}, ts={ts:g})")
    return region, CircleParams(0.0, r)


def stability_circle() -> LmiRegion:
    return circle_region(0.0, 1.0, "stability")


def intersect(regions) -> LmiRegion:
    """Block-diagonal characteristic function of the intersection."""
    regions = list(regions)
    if not regions:
        raise ValueError("cannot intersect an empty list of regions")
    if len(regions) == 1:
        return regions[0]
    lam = scipy.linalg.block_diag(*(r.lam for r in regions))
    beta = scipy.linalg.block_diag(*(r.beta for r in regions))
    label = " & ".join(r.label for r in regions)
    shapes = tuple(s for r in regions for s in r.shapes)
    return LmiRegion(lam, beta, label, shapes)


def _axis_gap(beta):
    # a - b of the inner ellipse written in terms of beta_max
    g = math.exp(-beta / math.tan(beta))
    return g * math.cos(beta) + math.exp(-math.pi / math.tan(beta)) - g * math.sin(beta)


def critical_zeta(return_angle: bool = False):
    """Damping ratio at which the inner ellipse degenerates into the inner disk.

    Below it the ellipse is vertically oriented (``a < b``), above it
    horizontally oriented. Solved by bisection on ``beta_max``.
    """
    beta = scipy.optimize.bisect(_axis_gap, 0.3, 1.4, xtol=1e-12)
    zeta = math.cos(beta)
    return (zeta, beta) if return_angle else zeta


def zplane_coords(z: complex, ts: float):
    """Invert ``z = exp(s ts)`` for an underdamped pole.

    Returns ``(zeta, wd, zeta_wn)``. Real ``z`` in (0, 1) gives ``zeta = 1``.
    """
    z = complex(z)
    rho = abs(z)
    if rho == 0 or rho >= 1:
        raise ValueError(f"z must lie strictly inside the unit disk and be nonzero, got {z}")
    zeta_wn = -math.log(rho) / ts
    wd = abs(math.atan2(z.imag, z.real)) / ts
    zeta = zeta_wn / math.hypot(zeta_wn, wd)
    return zeta, wd, zeta_wn


def _cardioid_zeta(z):
    z = np.asarray(z, dtype=complex)
    rho = np.abs(z)
    with np.errstate(divide="ignore", invalid="ignore"):
        sigma = -np.log(rho)
        zeta = sigma / np.hypot(sigma, np.angle(z))
    return zeta, rho


def exact_cardioid_contains(zeta_min: float, z, tol: float = 1e-12):
    """Membership in the exact image of the cone ``zeta >= zeta_min`` under ``exp``.

    The sampling period cancels: the cardioid depends on the damping ratio only.
    """
    _check_zeta(zeta_min)
    zeta, rho = _cardioid_zeta(z)
    if np.any(rho >= 1):
        raise ValueError("the cardioid is only defined strictly inside the unit disk")
    out = (rho == 0) | (zeta >= zeta_min - tol)
    return bool(out) if out.ndim == 0 else out


def cardioid_boundary(zeta_min: float, points: int = 720) -> np.ndarray:
    """Boundary ``exp(-|phi| / tan(beta_max)) exp(j phi)`` for ``phi`` in [-pi, pi]."""
    _check_zeta(zeta_min)
    beta = math.acos(zeta_min)
    phi = np.linspace(-math.pi, math.pi, points)
    return np.exp(-np.abs(phi) / math.tan(beta)) * np.exp(1j * phi)


def shape_boundary(shape: dict, points: int = 720, extent: float = 1.0) -> np.ndarray:
    """Boundary samples of one region member; conic rays run out to ``extent``."""
    kind = shape["kind"]
    theta = np.linspace(0, 2 * math.pi, points)
    if kind == "circle":
        return shape["c"] + shape["r"] * np.exp(1j * theta)
    if kind == "ellipse":
        return shape["c"] + shape["a"] * np.cos(theta) + 1j * shape["b"] * np.sin(theta)
    if kind == "conic":
        half = points // 2
        rad = np.linspace(extent, 0, half)
        up = rad * np.exp(1j * shape["theta"])
        down = np.linspace(0, extent, points - half) * np.exp(-1j * shape["theta"])
        return np.concatenate([up, down])
    raise ValueError(f"unknown shape kind {kind!r}")
