"""
Online learning in closed loop: model-reference adaptive control of a pendulum.

The plant is an Euler-discretised torque-actuated pendulum ``q'' = f(x) + u`` with
``f(x) = -sin(q) - q_dot``. The controller cancels a Lipschitz-interpolation model of
``f`` learned from noisy acceleration measurements and adds linear feedback on the
set-point error ``zeta = xi - x``:

    u = -f_hat(x) + K1 * zeta_1 + K2 * zeta_2

For a set-point with zero velocity this gives the error recursion
``zeta_{n+1} = M zeta_n - delta * d_n * e_2`` with ``d_n = f(x_n) - f_hat(x_n)`` and
``M = [[1, delta], [-delta K1, 1 - delta K2]]``.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .core import HolderMetric, LipschitzInterpolator, SampleSet
from .errors import ConfigurationError, DimensionError
from .noise import NoiseModel, make_uniform, sample_noise
from .tables import read_csv, write_csv


@dataclass(frozen=True)
class PendulumState:
    q: float
    q_dot: float

    def as_array(self) -> np.ndarray:
        return np.array([self.q, self.q_dot])


def pendulum_true_dynamics(state: PendulumState) -> float:
    return -math.sin(state.q) - state.q_dot


def pendulum_step(state: PendulumState, u: float, delta: float) -> PendulumState:
    """One explicit Euler step. The plant itself is noise-free."""
    if not delta > 0:
        raise ConfigurationError(f"sampling period must be positive, got {delta}")
    acc = pendulum_true_dynamics(state) + u
    return PendulumState(state.q + delta * state.q_dot, state.q_dot + delta * acc)


def observe_acceleration(state: PendulumState, u: float, noise: Optional[NoiseModel], rng) -> float:
    """Noisy measurement ``f(x) + u + e``."""
    return pendulum_true_dynamics(state) + u + sample_noise(noise, rng)


def control_law(state: PendulumState, predictor: Callable, setpoint: Sequence[float], k1: float, k2: float) -> float:
    """``-f_hat(x) + K1 (xi_1 - q) + K2 (xi_2 - q_dot)``; ``predictor`` maps a state array to a float."""
    x = state.as_array()
    return -float(predictor(x)) + k1 * (setpoint[0] - state.q) + k2 * (setpoint[1] - state.q_dot)


def closed_loop_matrix(delta: float, k1: float, k2: float) -> np.ndarray:
    return np.array([[1.0, delta], [-delta * k1, 1.0 - delta * k2]])


def spectral_radius(m) -> float:
    """Largest eigenvalue modulus of a real 2x2 matrix, from its characteristic polynomial."""
    m = np.asarray(m, dtype=float)
    if m.shape != (2, 2):
        raise DimensionError(f"expected a 2x2 matrix, got shape {m.shape}")
    tr = m[0, 0] + m[1, 1]
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    disc = tr * tr - 4.0 * det
    if disc < 0:
        # complex pair, |lambda|^2 = det
        return math.sqrt(det)
    root = math.sqrt(disc)
    return max(abs(tr + root), abs(tr - root)) / 2.0


@dataclass
class ControlConfig:
    delta: float = 0.1
    k1: float = 1.0
    k2: float = 1.0
    lipschitz: float = 11.0
    noise: Optional[NoiseModel] = field(default_factory=lambda: make_uniform(2.0))
    x0: Tuple[float, float] = (-2.0, -1.0)
    setpoint: Tuple[float, float] = (2 * math.pi, 0.0)
    steps: int = 300
    repetitions: int = 30
    seed: int = 0
    metric: HolderMetric = HolderMetric(2, 1.0)
    # replace the learned model by the true dynamics (used to isolate the linear loop)
    oracle: bool = False

    def __post_init__(self):
        if not self.delta > 0:
            raise ConfigurationError(f"delta must be positive, got {self.delta}")
        if self.steps < 0 or self.repetitions < 1:
            raise ConfigurationError(f"need steps >= 0 and repetitions >= 1, got {self.steps}, {self.repetitions}")
        if self.lipschitz < 0:
            raise ConfigurationError(f"lipschitz must be nonnegative, got {self.lipschitz}")
        self.x0 = tuple(float(v) for v in self.x0)
        self.setpoint = tuple(float(v) for v in self.setpoint)
        if len(self.x0) != 2 or len(self.setpoint) != 2:
            raise ConfigurationError("x0 and setpoint must have two entries (q, q_dot)")
        rho = spectral_radius(self.matrix)
        if not rho < 1:
            raise ConfigurationError(f"closed-loop matrix is not stable: spectral radius {rho:.6g} >= 1")

    @property
    def matrix(self) -> np.ndarray:
        return closed_loop_matrix(self.delta, self.k1, self.k2)


TRACE_FIELDS = ("step", "q", "qdot", "u", "zeta1", "zeta2", "err_norm", "f_hat", "f_true", "d_model")


@dataclass
class TrackingTrace:
    """Per-step closed-loop record; row ``n`` holds ``x_n`` and the control applied at ``x_n``.

    The last row is the state after the final step; its control and model error are
    evaluated but never applied.
    """

    step: np.ndarray
    q: np.ndarray
    qdot: np.ndarray
    u: np.ndarray
    zeta1: np.ndarray
    zeta2: np.ndarray
    err_norm: np.ndarray
    f_hat: np.ndarray
    f_true: np.ndarray
    d_model: np.ndarray

    def __len__(self):
        return len(self.step)

    @property
    def zeta(self) -> np.ndarray:
        return np.stack([self.zeta1, self.zeta2], axis=1)

    def __eq__(self, other):
        return isinstance(other, TrackingTrace) and all(
            np.array_equal(getattr(self, f), getattr(other, f)) for f in TRACE_FIELDS)


def run_episode(config: ControlConfig, rng: np.random.Generator) -> TrackingTrace:
    xi = config.setpoint
    model = LipschitzInterpolator(config.metric, config.lipschitz)
    data = SampleSet(2)

    def f_hat(x):
        if config.oracle:
            return pendulum_true_dynamics(PendulumState(x[0], x[1]))
        # zero prior until the first measurement arrives
        return model.predict(data, x) if len(data) else 0.0

    rows = []
    state = PendulumState(*config.x0)
    for n in range(config.steps + 1):
        x = state.as_array()
        pred = f_hat(x)
        u = control_law(state, lambda _: pred, xi, config.k1, config.k2)
        truth = pendulum_true_dynamics(state)
        z1, z2 = xi[0] - state.q, xi[1] - state.q_dot
        rows.append((n, state.q, state.q_dot, u, z1, z2, math.hypot(z1, z2), pred, truth, truth - pred))
        if n == config.steps:
            break
        acc = observe_acceleration(state, u, config.noise, rng)
        data.add(x, acc - u)
        state = pendulum_step(state, u, config.delta)
    cols = list(zip(*rows))
    trace = TrackingTrace(*(np.array(c, dtype=float) for c in cols))
    trace.step = trace.step.astype(int)
    return trace


@dataclass
class MonteCarloResult:
    traces: List[TrackingTrace]

    @property
    def errors(self) -> np.ndarray:
        """Tracking error norms, shape ``(repetitions, steps + 1)``."""
        return np.array([t.err_norm for t in self.traces])

    @property
    def mean_error(self) -> np.ndarray:
        return self.errors.mean(axis=0)

    @property
    def std_error(self) -> np.ndarray:
        e = self.errors
        return e.std(axis=0, ddof=1) if len(e) > 1 else np.zeros(e.shape[1])


def episode_rng(seed: int, rep: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, rep]))


def run_monte_carlo(config: ControlConfig) -> MonteCarloResult:
    return MonteCarloResult([run_episode(config, episode_rng(config.seed, r)) for r in range(config.repetitions)])


TRACE_HEADER = ("rep", "step", "q", "qdot", "u", "zeta1", "zeta2", "err_norm", "d_model")
MC_SUMMARY_HEADER = ("step", "mean_err", "std_err")


def trace_rows(result: MonteCarloResult):
    cols = TRACE_HEADER[2:]
    for rep, t in enumerate(result.traces):
        for i in range(len(t)):
            yield (rep, int(t.step[i])) + tuple(float(getattr(t, c)[i]) for c in cols)


def mc_summary_rows(result: MonteCarloResult):
    for i, (m, s) in enumerate(zip(result.mean_error.tolist(), result.std_error.tolist())):
        yield i, m, s


def write_trace_csv(result: MonteCarloResult, path):
    write_csv(path, TRACE_HEADER, trace_rows(result))


def write_mc_summary_csv(result: MonteCarloResult, path):
    write_csv(path, MC_SUMMARY_HEADER, mc_summary_rows(result))


def read_trace_csv(path) -> dict:
    """Parse a trace CSV into ``{rep: {column: array}}``."""
    out: dict = {}
    for row in read_csv(path):
        rec = out.setdefault(int(row["rep"]), {k: [] for k in TRACE_HEADER[1:]})
        for k in TRACE_HEADER[1:]:
            rec[k].append(int(row[k]) if k == "step" else float(row[k]))
    return {rep: {k: np.array(v) for k, v in cols.items()} for rep, cols in out.items()}


class NarxRegressor:
    """Lagged regressor ``(y_{n-dy}, ..., y_{n-1}, u_{n-du}, ..., u_n)`` for NARX models.

    Outputs have length ``l`` and controls length ``s``; histories start at zero.
    """

    def __init__(self, d_y: int, d_u: int, l: int = 1, s: int = 1):
        if d_y < 0 or d_u < 0 or l < 1 or s < 1:
            raise ConfigurationError(f"invalid NARX orders d_y={d_y}, d_u={d_u}, l={l}, s={s}")
        self.d_y, self.d_u, self.l, self.s = d_y, d_u, l, s
        self._ys = deque([np.zeros(l) for _ in range(d_y)], maxlen=d_y or None)
        self._us = deque([np.zeros(s) for _ in range(d_u)], maxlen=d_u or None)

    @property
    def size(self) -> int:
        return self.d_y * self.l + (self.d_u + 1) * self.s

    def vector(self, u_now) -> np.ndarray:
        u_now = np.atleast_1d(np.asarray(u_now, dtype=float))
        if u_now.shape != (self.s,):
            raise DimensionError(f"control must have length {self.s}")
        parts = list(self._ys) if self.d_y else []
        parts += list(self._us) if self.d_u else []
        parts.append(u_now)
        return np.concatenate(parts)

    def push(self, y, u) -> None:
        """Record the output observed and the control applied at the current step."""
        y = np.atleast_1d(np.asarray(y, dtype=float))
        u = np.atleast_1d(np.asarray(u, dtype=float))
        if y.shape != (self.l,) or u.shape != (self.s,):
            raise DimensionError(f"expected output length {self.l} and control length {self.s}")
        if self.d_y:
            self._ys.append(y)
        if self.d_u:
            self._us.append(u)
