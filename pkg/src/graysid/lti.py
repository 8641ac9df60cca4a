"""Linear time-invariant models, discretization, excitation signals and simulation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

__all__ = [
    "ContinuousStateSpace",
    "DiscreteStateSpace",
    "TransferFunction",
    "SignalRecord",
    "second_order_tf",
    "tf_to_ss",
    "c2d_zoh",
    "prbs",
    "colored_noise",
    "simulate",
    "step_response",
    "frequency_response",
    "markov_parameters",
    "output_variance",
    "PRBS_TAPS",
]


def _as_matrix(x, name):
    m = np.atleast_2d(np.asarray(x, dtype=float))
    if m.ndim != 2:
        raise ValueError(f"{name} must be a 2-D matrix")
    return m


def _check_abcd(a, b, c, d):
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError(f"A must be square, got {a.shape}")
    if b.shape[0] != n:
        raise ValueError(f"B must have {n} rows, got {b.shape}")
    if c.shape[1] != n:
        raise ValueError(f"C must have {n} columns, got {c.shape}")
    if d.shape != (c.shape[0], b.shape[1]):
        raise ValueError(f"D must be {(c.shape[0], b.shape[1])}, got {d.shape}")


@dataclass(frozen=True)
class ContinuousStateSpace:
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray

    def __post_init__(self):
        for name in "abcd":
            object.__setattr__(self, name, _as_matrix(getattr(self, name), name.upper()))
        _check_abcd(self.a, self.b, self.c, self.d)

    @property
    def order(self) -> int:
        return self.a.shape[0]

    def poles(self) -> np.ndarray:
        return np.linalg.eigvals(self.a)


@dataclass(frozen=True)
class DiscreteStateSpace:
    """State-space model ``x[k+1] = A x[k] + B u[k]``, ``y[k] = C x[k] + D u[k]``.

    ``ts`` is the sampling period in seconds.
    """

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    ts: float = 1.0

    def __post_init__(self):
        for name in "abcd":
            object.__setattr__(self, name, _as_matrix(getattr(self, name), name.upper()))
        _check_abcd(self.a, self.b, self.c, self.d)
        if not self.ts > 0:
            raise ValueError(f"sampling period must be positive, got {self.ts}")
        object.__setattr__(self, "ts", float(self.ts))

    @property
    def order(self) -> int:
        return self.a.shape[0]

    @property
    def n_inputs(self) -> int:
        return self.b.shape[1]

    @property
    def n_outputs(self) -> int:
        return self.c.shape[0]

    def poles(self) -> np.ndarray:
        return np.linalg.eigvals(self.a)

    def spectral_radius(self) -> float:
        if self.order == 0:
            return 0.0
        return float(np.max(np.abs(self.poles())))

    def with_a(self, a) -> "DiscreteStateSpace":
        """Copy of the model with the state matrix replaced."""
        return DiscreteStateSpace(a, self.b, self.c, self.d, self.ts)

    def to_dict(self) -> dict:
        return {
            "ts": self.ts,
            "a": self.a.tolist(),
            "b": self.b.tolist(),
            "c": self.c.tolist(),
            "d": self.d.tolist(),
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "DiscreteStateSpace":
        ts = obj.get("ts")
        return cls(obj["a"], obj["b"], obj["c"], obj["d"], 1.0 if ts is None else ts)


@dataclass(frozen=True)
class TransferFunction:
    """SISO transfer function with coefficients in descending powers of s."""

    num: np.ndarray
    den: np.ndarray

    def __post_init__(self):
        num = np.trim_zeros(np.atleast_1d(np.asarray(self.num, dtype=float)), "f")
        den = np.trim_zeros(np.atleast_1d(np.asarray(self.den, dtype=float)), "f")
        if den.size == 0:
            raise ValueError("denominator must have a nonzero coefficient")
        if num.size == 0:
            num = np.zeros(1)
        if num.size > den.size:
            raise ValueError("improper transfer function: numerator degree exceeds denominator degree")
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    def poles(self) -> np.ndarray:
        return np.roots(self.den)

    def __call__(self, s):
        return np.polyval(self.num, s) / np.polyval(self.den, s)


@dataclass(frozen=True)
class SignalRecord:
    """Uniformly sampled, time-stamped input/output channels.

    Channel names follow the ``u1, u2, ..., y1, y2, ...`` convention.
    """

    ts: float
    t: np.ndarray
    channels: dict = field(default_factory=dict)

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        object.__setattr__(self, "t", t)
        chans = {k: np.asarray(v, dtype=float) for k, v in self.channels.items()}
        object.__setattr__(self, "channels", chans)
        for name, v in chans.items():
            if v.shape != t.shape:
                raise ValueError(f"channel {name!r} has {v.size} samples, expected {t.size}")
        if t.size > 1 and not np.allclose(np.diff(t), self.ts, rtol=1e-9, atol=1e-12 * max(1.0, t[-1])):
            raise ValueError("time stamps are not uniformly spaced by ts")

    def __len__(self):
        return self.t.size

    def _group(self, prefix):
        names = sorted((k for k in self.channels if k.startswith(prefix) and k[1:].isdigit()),
                       key=lambda k: int(k[1:]))
        if not names:
            return np.zeros((self.t.size, 0))
        return np.column_stack([self.channels[k] for k in names])

    @property
    def u(self) -> np.ndarray:
        """Inputs as an (N, n_u) array."""
        return self._group("u")

    @property
    def y(self) -> np.ndarray:
        """Outputs as an (N, n_y) array."""
        return self._group("y")

    @classmethod
    def from_arrays(cls, ts, u, y, t0=0.0) -> "SignalRecord":
        u = np.asarray(u, dtype=float).reshape(len(u), -1)
        y = np.asarray(y, dtype=float).reshape(len(y), -1)
        t = t0 + ts * np.arange(u.shape[0])
        chans = {f"u{i + 1}": u[:, i] for i in range(u.shape[1])}
        chans.update({f"y{i + 1}": y[:, i] for i in range(y.shape[1])})
        return cls(ts, t, chans)

    def header(self) -> list[str]:
        us = [f"u{i + 1}" for i in range(self.u.shape[1])]
        ys = [f"y{i + 1}" for i in range(self.y.shape[1])]
        return ["t", *us, *ys]


def second_order_tf(k: float, zeta: float, wn: float) -> TransferFunction:
    """``K wn^2 / (s^2 + 2 zeta wn s + wn^2)`` for an underdamped system."""
    if not 0 < zeta < 1:
        raise ValueError(f"damping ratio must lie in (0, 1), got {zeta}")
    if not wn > 0:
        raise ValueError(f"natural frequency must be positive, got {wn}")
    return TransferFunction([k * wn**2], [1.0, 2 * zeta * wn, wn**2])


def tf_to_ss(tf: TransferFunction) -> ContinuousStateSpace:
    """Controllable canonical realization of a proper SISO transfer function."""
    den = tf.den / tf.den[0]
    num = tf.num / tf.den[0]
    n = den.size - 1
    num = np.concatenate([np.zeros(n + 1 - num.size), num])
    d = num[0]
    if n == 0:
        return ContinuousStateSpace(np.zeros((0, 0)), np.zeros((0, 1)), np.zeros((1, 0)), [[d]])
    a = np.zeros((n, n))
    a[0, :] = -den[1:]
    a[1:, :-1] = np.eye(n - 1)
    b = np.zeros((n, 1))
    b[0, 0] = 1.0
    # strictly proper remainder after pulling out the feedthrough
    c = (num[1:] - d * den[1:]).reshape(1, n)
    return ContinuousStateSpace(a, b, c, [[d]])


def c2d_zoh(css: ContinuousStateSpace, ts: float) -> DiscreteStateSpace:
    """Zero-order-hold discretization via the exponential of ``[[A, B], [0, 0]]``."""
    if not ts > 0:
        raise ValueError(f"sampling period must be positive, got {ts}")
    n, m = css.b.shape
    block = np.zeros((n + m, n + m))
    block[:n, :n] = css.a
    block[:n, n:] = css.b
    phi = scipy.linalg.expm(block * ts)
    return DiscreteStateSpace(phi[:n, :n], phi[:n, n:], css.c, css.d, ts)


# Primitive feedback polynomials x^n + x^k + ... + 1, listed by exponent.
PRBS_TAPS = {
    2: (2, 1), 3: (3, 2), 4: (4, 3), 5: (5, 3), 6: (6, 5), 7: (7, 6),
    8: (8, 6, 5, 4), 9: (9, 5), 10: (10, 7), 11: (11, 9), 12: (12, 6, 4, 1),
    13: (13, 4, 3, 1), 14: (14, 5, 3, 1), 15: (15, 14), 16: (16, 15, 13, 4),
    17: (17, 14), 18: (18, 11), 19: (19, 6, 2, 1), 20: (20, 17), 21: (21, 19),
    22: (22, 21), 23: (23, 18), 24: (24, 23, 22, 17), 25: (25, 22),
    26: (26, 6, 2, 1), 27: (27, 5, 2, 1), 28: (28, 25), 29: (29, 27),
    30: (30, 6, 4, 1), 31: (31, 28), 32: (32, 22, 2, 1),
}


def lfsr_bits(bits: int, count: int, seed: int = 0) -> np.ndarray:
    """``count`` output bits of a maximal-length Fibonacci LFSR."""
    if bits not in PRBS_TAPS:
        raise ValueError(f"no primitive polynomial tabled for a {bits}-bit register (supported: 2-32)")
    period = (1 << bits) - 1
    state = 1 + (int(seed) % period)
    shifts = [bits - t for t in PRBS_TAPS[bits]]
    out = np.empty(count, dtype=np.uint8)
    for i in range(count):
        out[i] = state & 1
        fb = 0
        for s in shifts:
            fb ^= (state >> s) & 1
        state = (state >> 1) | (fb << (bits - 1))
    return out


def prbs(bits: int, hold: int, length: int, amplitude: float = 1.0, seed: int = 0) -> np.ndarray:
    """Two-level pseudo-random binary sequence.

    Each LFSR chip is held for ``hold`` samples; levels are ``+amplitude`` and
    ``-amplitude``. The LFSR start state is derived from ``seed``.
    """
    if hold < 1:
        raise ValueError("hold must be at least one sample")
    if length < 0:
        raise ValueError("length must be nonnegative")
    chips = lfsr_bits(bits, -(-length // hold), seed)
    seq = np.repeat(np.where(chips == 1, amplitude, -amplitude), hold)
    return seq[:length].astype(float)


def _lsim(a, b, c, d, u, x0):
    n = a.shape[0]
    N = u.shape[0]
    y = np.empty((N, c.shape[0]))
    x = np.array(x0, dtype=float).reshape(n)
    bu = u @ b.T
    du = u @ d.T
    for k in range(N):
        y[k] = c @ x
        x = a @ x + bu[k]
    return y + du, x


def colored_noise(filt: TransferFunction, ts: float, sigma: float, length: int,
                  seed=None, burn_in: int = 0) -> np.ndarray:
    """White Gaussian noise of standard deviation ``sigma`` passed through ``filt``.

    The filter is discretized by zero-order hold at ``ts``. ``burn_in`` extra
    leading samples are simulated and discarded (only meaningful for stable
    filters).
    """
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    if sigma == 0:
        return np.zeros(length)
    dss = c2d_zoh(tf_to_ss(filt), ts)
    rng = np.random.default_rng(seed)
    v = sigma * rng.standard_normal(length + burn_in)
    y, _ = _lsim(dss.a, dss.b, dss.c, dss.d, v.reshape(-1, 1), np.zeros(dss.order))
    return y[burn_in:, 0]


def output_variance(dss: DiscreteStateSpace, sigma: float = 1.0) -> float:
    """Stationary output variance for white input of standard deviation ``sigma``."""
    if dss.spectral_radius() >= 1:
        raise ValueError("stationary variance requires a stable model")
    x = scipy.linalg.solve_discrete_lyapunov(dss.a, dss.b @ dss.b.T)
    return float(sigma**2 * (dss.c @ x @ dss.c.T + dss.d @ dss.d.T)[0, 0])


def simulate(dss: DiscreteStateSpace, u, x0=None, output_noise=None,
             process_noise=None, t0: float = 0.0) -> SignalRecord:
    """Simulate ``dss`` driven by ``u``; returns time-stamped ``u`` and ``y`` channels."""
    u = np.asarray(u, dtype=float)
    if u.ndim == 1:
        u = u.reshape(-1, 1)
    N = u.shape[0]
    if N < 1:
        raise ValueError("input must contain at least one sample")
    if u.shape[1] != dss.n_inputs:
        raise ValueError(f"model has {dss.n_inputs} inputs, got {u.shape[1]} input channels")
    x0 = np.zeros(dss.order) if x0 is None else np.asarray(x0, dtype=float).ravel()
    if x0.size != dss.order:
        raise ValueError(f"initial state must have length {dss.order}")
    if process_noise is None:
        y, _ = _lsim(dss.a, dss.b, dss.c, dss.d, u, x0)
    else:
        w = np.asarray(process_noise, dtype=float).reshape(N, dss.order)
        # w enters the state equation like an input with identity gain
        b = np.hstack([dss.b, np.eye(dss.order)])
        d = np.hstack([dss.d, np.zeros((dss.n_outputs, dss.order))])
        y, _ = _lsim(dss.a, b, dss.c, d, np.hstack([u, w]), x0)
    if output_noise is not None:
        nu = np.asarray(output_noise, dtype=float).reshape(N, -1)
        if nu.shape[1] not in (1, dss.n_outputs):
            raise ValueError("output noise has the wrong number of channels")
        y = y + nu
    return SignalRecord.from_arrays(dss.ts, u, y, t0)


def step_response(model: DiscreteStateSpace, duration: float, noise=None) -> SignalRecord:
    """Unit-step response from rest, ``floor(duration / ts) + 1`` samples long."""
    N = int(math.floor(duration / model.ts + 1e-9)) + 1
    u = np.ones((N, model.n_inputs))
    return simulate(model, u, output_noise=noise)


def markov_parameters(dss: DiscreteStateSpace, count: int) -> np.ndarray:
    """``D, CB, CAB, ..., CA^(count-2)B`` stacked along the first axis."""
    out = np.empty((count, dss.n_outputs, dss.n_inputs))
    if count:
        out[0] = dss.d
    ak_b = dss.b
    for k in range(1, count):
        out[k] = dss.c @ ak_b
        ak_b = dss.a @ ak_b
    return out


def frequency_response(dss: DiscreteStateSpace, frequencies) -> np.ndarray:
    """``C (exp(j w ts) I - A)^-1 B + D`` on a grid of angular frequencies (rad/s).

    Returns an array of shape (len(frequencies), n_y, n_u).
    """
    w = np.atleast_1d(np.asarray(frequencies, dtype=float))
    nyquist = math.pi / dss.ts
    if np.any(w <= 0) or np.any(w > nyquist * (1 + 1e-12)):
        raise ValueError(f"frequencies must lie in (0, pi/ts] = (0, {nyquist:g}]")
    n = dss.order
    out = np.empty((w.size, dss.n_outputs, dss.n_inputs), dtype=complex)
    for i, wi in enumerate(w):
        z = np.exp(1j * wi * dss.ts)
        out[i] = dss.c @ np.linalg.solve(z * np.eye(n) - dss.a, dss.b) + dss.d
    return out
