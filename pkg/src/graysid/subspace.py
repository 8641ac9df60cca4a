"""PI-MOESP subspace identification."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .lti import DiscreteStateSpace

__all__ = ["HankelConfig", "IdentificationResult", "block_hankel", "pi_moesp", "select_order"]


@dataclass(frozen=True)
class HankelConfig:
    past: int = 10
    future: int = 10
    order: int | None = None
    threshold: float = 1e-3
    detrend: bool = True

    def __post_init__(self):
        if self.past < 1 or self.future < 1:
            raise ValueError("past and future horizons must be at least 1")
        if self.order is not None and self.order < 1:
            raise ValueError("model order must be at least 1")


@dataclass
class IdentificationResult:
    model: DiscreteStateSpace
    singular_values: np.ndarray
    order: int
    x0: np.ndarray | None = None


def _as_channels(x):
    x = np.asarray(x, dtype=float)
    return x.reshape(-1, 1) if x.ndim == 1 else x


def block_hankel(sequence, rows: int, cols: int) -> np.ndarray:
    """Block Hankel matrix with ``rows`` block rows and ``cols`` columns.

    Block row ``i`` holds samples ``i, ..., i + cols - 1`` (one row per channel).
    """
    x = _as_channels(sequence)
    N, ch = x.shape
    if rows < 1 or cols < 1:
        raise ValueError("rows and cols must be positive")
    if rows + cols - 1 > N:
        raise ValueError(f"need {rows + cols - 1} samples for a {rows}x{cols} block Hankel matrix, got {N}")
    out = np.empty((rows * ch, cols))
    for i in range(rows):
        out[i * ch:(i + 1) * ch] = x[i:i + cols].T
    return out


def select_order(singular_values, threshold: float = 1e-3, order: int | None = None) -> int:
    """Number of singular values at least ``threshold`` times the largest.

    An explicit ``order`` wins.
    """
    if order is not None:
        return int(order)
    s = np.asarray(singular_values, dtype=float)
    if s.size == 0:
        raise ValueError("no singular values")
    if not s[0] > 0:
        return 0
    return int(np.count_nonzero(s / s[0] >= threshold))


def _estimate_bd(a, c, u, y):
    """Least-squares ``B``, ``D`` and initial state with ``A``, ``C`` fixed."""
    N, m = u.shape
    n = a.shape[0]
    l = c.shape[0]
    # state responses to unit input in each (state, input) entry of B
    states = np.zeros((n, n * m))
    reg_b = np.empty((N, l, n * m))
    for k in range(N):
        reg_b[k] = c @ states
        states = a @ states + np.kron(u[k], np.eye(n))
    reg_x0 = np.empty((N, l, n))
    ak = np.eye(n)
    for k in range(N):
        reg_x0[k] = c @ ak
        ak = a @ ak
    reg_d = np.einsum("km,lj->kljm", u, np.eye(l)).reshape(N, l, l * m)
    phi = np.concatenate([reg_b, reg_d, reg_x0], axis=2).reshape(N * l, -1)
    theta, *_ = np.linalg.lstsq(phi, y.reshape(-1), rcond=None)
    b = theta[:n * m].reshape(m, n).T
    d = theta[n * m:n * m + l * m].reshape(l, m)
    x0 = theta[n * m + l * m:]
    return b, d, x0


def pi_moesp(u, y, cfg: HankelConfig | None = None, ts: float = 1.0) -> IdentificationResult:
    """Identify ``(A, B, C, D)`` from input/output data with past-input PI-MOESP.

    The stacked future-input, past-input and future-output Hankel matrices
    are LQ-factorized; the SVD of the future-output block projected on past
    inputs spans the extended observability matrix. ``A`` follows from shift
    invariance, ``C`` from the first block row, and ``B``, ``D`` (with the
    initial state) from a linear regression over the full record.
    """
    cfg = cfg or HankelConfig()
    u = _as_channels(u)
    y = _as_channels(y)
    if u.shape[0] != y.shape[0]:
        raise ValueError("input and output records differ in length")
    if cfg.detrend:
        u = u - u.mean(axis=0)
        y = y - y.mean(axis=0)
    N, m = u.shape
    l = y.shape[1]
    p, f = cfg.past, cfg.future
    cols = N - p - f + 1
    if cols < (p + f) * (m + l):
        raise ValueError(f"data too short: {N} samples for horizons past={p}, future={f}")

    up = block_hankel(u, p, cols)
    uf = block_hankel(u[p:], f, cols)
    yf = block_hankel(y[p:], f, cols)
    stacked = np.vstack([uf, up, yf])
    r = scipy.linalg.qr(stacked.T, mode="r")[0]
    lower = r.T
    i0, i1 = f * m, f * m + p * m
    l32 = lower[i1:, i0:i1]
    uu, s, _ = np.linalg.svd(l32, full_matrices=False)

    eps = np.finfo(float).eps * max(stacked.shape)
    if s.size == 0 or s[0] <= eps * max(1.0, np.abs(stacked).max()):
        raise ValueError("rank-deficient data: no output component correlated with past inputs")
    n = select_order(s, cfg.threshold, cfg.order)
    if n < 1 or n >= f * l:
        raise ValueError(f"cannot use model order {n} with future horizon {f}")

    gamma = uu[:, :n] * np.sqrt(s[:n])
    c = gamma[:l]
    a = np.linalg.lstsq(gamma[:-l], gamma[l:], rcond=None)[0]
    b, d, x0 = _estimate_bd(a, c, u, y)
    return IdentificationResult(DiscreteStateSpace(a, b, c, d, ts), s, n, x0)
