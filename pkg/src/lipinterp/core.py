"""
Lipschitz interpolation (kinky inference) under bounded noise.

Given samples ``(s_i, y_i)`` and a Lipschitz hyperparameter ``L`` the ceiling and
floor functions are

    u(x) = min_i y_i + L * d(x, s_i)
    l(x) = max_i y_i - L * d(x, s_i)

and the predictor is their midpoint. ``d`` is a Hölder metric ``||x - y||_p ** alpha``.
All queries are a plain linear scan over the samples, vectorised with numpy and
evaluated in blocks so that large query grids stay within a bounded memory budget.

Query arrays follow one convention throughout: a 1-D array of length ``dim`` (or a
scalar when ``dim == 1``) is a single point and yields a float; a 2-D array of shape
``(m, dim)`` is a batch and yields an array of length ``m``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigurationError, DimensionError, EmptyDataError, InputError

# distance-matrix entries evaluated per block
_BLOCK_ELEMENTS = 1 << 20


@dataclass(frozen=True)
class HolderMetric:
    """Input metric ``d(x, y) = ||x - y||_p ** alpha``.

    ``p`` is a positive integer or ``math.inf``; ``alpha`` lies in ``(0, 1]``.
    """

    p: float = 2
    alpha: float = 1.0

    def __post_init__(self):
        p = self.p
        if p != math.inf:
            if isinstance(p, bool) or float(p) != int(p) or p < 1:
                raise ConfigurationError(f"norm order p must be a positive integer or inf, got {p!r}")
            object.__setattr__(self, "p", int(p))
        if not (0.0 < self.alpha <= 1.0):
            raise ConfigurationError(f"Hölder exponent alpha must lie in (0, 1], got {self.alpha!r}")

    def pairwise(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Distance matrix between the rows of ``a`` (m, d) and ``b`` (n, d)."""
        if a.shape[1] != b.shape[1]:
            raise DimensionError(f"dimension mismatch: {a.shape[1]} vs {b.shape[1]}")
        if a.shape[1] == 1:
            dist = np.abs(a[:, 0, None] - b[None, :, 0])
        else:
            diff = np.abs(a[:, None, :] - b[None, :, :])
            if self.p == 1:
                dist = diff.sum(axis=-1)
            elif self.p == 2:
                dist = np.sqrt((diff * diff).sum(axis=-1))
            elif self.p == math.inf:
                dist = diff.max(axis=-1)
            else:
                dist = (diff ** self.p).sum(axis=-1) ** (1.0 / self.p)
        if self.alpha != 1.0:
            dist = dist ** self.alpha
        return dist

    def distance(self, x, y) -> float:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        y = np.atleast_1d(np.asarray(y, dtype=float))
        if x.ndim != 1 or x.shape != y.shape:
            raise DimensionError(f"cannot compare vectors of shape {x.shape} and {y.shape}")
        return float(self.pairwise(x[None, :], y[None, :])[0, 0])

    def to_dict(self) -> dict:
        return {"p": "inf" if self.p == math.inf else self.p, "alpha": self.alpha}

    @classmethod
    def from_dict(cls, d: dict) -> "HolderMetric":
        p = d.get("p", 2)
        if isinstance(p, str):
            if p.lower() not in ("inf", "infinity"):
                raise ConfigurationError(f"unrecognised norm order {p!r}")
            p = math.inf
        return cls(p=p, alpha=float(d.get("alpha", 1.0)))


def holder_distance(x, y, metric: HolderMetric) -> float:
    return metric.distance(x, y)


class SampleSet:
    """Append-only collection of ``(input vector, noisy output)`` pairs.

    Storage grows geometrically, so ``add`` is amortised O(d). The ``inputs`` and
    ``outputs`` properties return read-only views of the filled part of the buffers.
    """

    def __init__(self, dim: int, inputs=None, outputs=None):
        if dim < 1:
            raise DimensionError(f"input dimension must be >= 1, got {dim}")
        self.dim = int(dim)
        self._x = np.empty((16, self.dim))
        self._y = np.empty(16)
        self._n = 0
        if inputs is not None or outputs is not None:
            self.extend(inputs if inputs is not None else [], outputs if outputs is not None else [])

    def __len__(self):
        return self._n

    @property
    def count(self) -> int:
        return self._n

    @property
    def inputs(self) -> np.ndarray:
        view = self._x[: self._n]
        view.flags.writeable = False
        return view

    @property
    def outputs(self) -> np.ndarray:
        view = self._y[: self._n]
        view.flags.writeable = False
        return view

    def _reserve(self, extra: int):
        need = self._n + extra
        if need <= len(self._y):
            return
        cap = max(need, 2 * len(self._y))
        x = np.empty((cap, self.dim))
        y = np.empty(cap)
        x[: self._n] = self._x[: self._n]
        y[: self._n] = self._y[: self._n]
        self._x, self._y = x, y

    def add(self, s, y: float) -> "SampleSet":
        s = np.atleast_1d(np.asarray(s, dtype=float))
        if s.shape != (self.dim,):
            raise DimensionError(f"expected an input of length {self.dim}, got shape {s.shape}")
        self._reserve(1)
        self._x[self._n] = s
        self._y[self._n] = float(y)
        self._n += 1
        return self

    def extend(self, inputs, outputs) -> "SampleSet":
        x = np.asarray(inputs, dtype=float)
        y = np.asarray(outputs, dtype=float).reshape(-1)
        if x.size == 0:
            x = x.reshape(0, self.dim)
        elif x.ndim == 1 and self.dim == 1:
            x = x.reshape(-1, 1)
        if x.ndim != 2 or x.shape[1] != self.dim or x.shape[0] != y.shape[0]:
            raise DimensionError(f"inputs of shape {x.shape} and outputs of shape {y.shape} do not form a {self.dim}-d sample set")
        self._reserve(len(y))
        self._x[self._n : self._n + len(y)] = x
        self._y[self._n : self._n + len(y)] = y
        self._n += len(y)
        return self

    def copy(self) -> "SampleSet":
        return SampleSet(self.dim, self.inputs.copy(), self.outputs.copy())

    def to_csv(self, path):
        write_sample_csv(path, self.inputs, self.outputs)

    @classmethod
    def from_csv(cls, path) -> "SampleSet":
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if not header or header[-1] != "y" or header[:-1] != [f"x{i}" for i in range(len(header) - 1)]:
                raise ConfigurationError(f"{path}: expected header x0,...,x{{d-1}},y; got {header}")
            dim = len(header) - 1
            rows = [[float(v) for v in row] for row in reader if row]
        if dim < 1:
            raise ConfigurationError(f"{path}: no input columns")
        data = np.array(rows, dtype=float).reshape(-1, dim + 1)
        return cls(dim, data[:, :dim], data[:, dim])


def write_sample_csv(path, inputs, outputs):
    inputs = np.asarray(inputs, dtype=float)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"x{i}" for i in range(inputs.shape[1])] + ["y"])
        for x, y in zip(inputs.tolist(), np.asarray(outputs, dtype=float).tolist()):
            w.writerow([repr(v) for v in x] + [repr(y)])


def add_sample(data: SampleSet, s, y: float) -> SampleSet:
    return data.add(s, y)


class MultiOutputSampleSet:
    """Samples with vector-valued outputs of length ``dim_out``."""

    def __init__(self, dim_in: int, dim_out: int, inputs=None, outputs=None):
        self.dim_in = int(dim_in)
        self.dim_out = int(dim_out)
        x = np.asarray(inputs if inputs is not None else [], dtype=float)
        y = np.asarray(outputs if outputs is not None else [], dtype=float)
        if x.size % self.dim_in or y.size % self.dim_out or x.size // self.dim_in != y.size // self.dim_out:
            raise DimensionError(f"inputs {x.shape} / outputs {y.shape} do not match dims ({dim_in}, {dim_out})")
        self.inputs = x.reshape(-1, self.dim_in).copy()
        self.outputs = y.reshape(-1, self.dim_out).copy()

    def __len__(self):
        return len(self.inputs)

    def add(self, s, y) -> "MultiOutputSampleSet":
        s = np.atleast_1d(np.asarray(s, dtype=float))
        y = np.atleast_1d(np.asarray(y, dtype=float))
        if s.shape != (self.dim_in,) or y.shape != (self.dim_out,):
            raise DimensionError(f"expected shapes ({self.dim_in},) and ({self.dim_out},), got {s.shape} and {y.shape}")
        self.inputs = np.vstack([self.inputs, s])
        self.outputs = np.vstack([self.outputs, y])
        return self

    def component(self, j: int) -> SampleSet:
        return SampleSet(self.dim_in, self.inputs, self.outputs[:, j])


def _as_queries(x, dim: int) -> Tuple[np.ndarray, bool]:
    q = np.asarray(x, dtype=float)
    if q.ndim == 0:
        if dim != 1:
            raise DimensionError(f"scalar query given for a {dim}-d input space")
        return q.reshape(1, 1), True
    if q.ndim == 1:
        if q.shape[0] != dim:
            raise DimensionError(f"query of length {q.shape[0]} for a {dim}-d input space")
        return q[None, :], True
    if q.ndim == 2 and q.shape[1] == dim:
        return q, False
    raise DimensionError(f"query array of shape {q.shape} for a {dim}-d input space")


def _envelope_arrays(queries, inputs, outputs, metric, lipschitz):
    """Return (floor, ceiling) at each query row; outputs may be (n,) or (n, k)."""
    n = len(inputs)
    m = len(queries)
    multi = outputs.ndim == 2
    shape = (m, outputs.shape[1]) if multi else (m,)
    lo = np.empty(shape)
    hi = np.empty(shape)
    step = max(1, _BLOCK_ELEMENTS // max(n, 1))
    for start in range(0, m, step):
        block = slice(start, start + step)
        reach = lipschitz * metric.pairwise(queries[block], inputs)
        if multi:
            for j in range(outputs.shape[1]):
                hi[block, j] = (outputs[:, j] + reach).min(axis=1)
                lo[block, j] = (outputs[:, j] - reach).max(axis=1)
        else:
            hi[block] = (outputs + reach).min(axis=1)
            lo[block] = (outputs - reach).max(axis=1)
    return lo, hi


@dataclass(frozen=True)
class LipschitzInterpolator:
    """Predictor configuration: metric, Lipschitz constant and optional noise bounds.

    ``noise_bound`` is the symmetric bound used by :meth:`envelope`;
    ``noise_bounds_asym`` is a pair ``(e1, e2)`` with ``e1 < 0 < e2`` used by
    :meth:`boundary_estimators`.
    """

    metric: HolderMetric = HolderMetric()
    lipschitz: float = 1.0
    noise_bound: Optional[float] = None
    noise_bounds_asym: Optional[Tuple[float, float]] = None

    def __post_init__(self):
        if not (self.lipschitz >= 0) or math.isinf(self.lipschitz):
            raise ConfigurationError(f"Lipschitz constant must be finite and nonnegative, got {self.lipschitz!r}")
        if self.noise_bound is not None and not (self.noise_bound >= 0):
            raise ConfigurationError(f"noise bound must be nonnegative, got {self.noise_bound!r}")
        if self.noise_bounds_asym is not None:
            e1, e2 = self.noise_bounds_asym
            if not (e1 < 0 < e2):
                raise ConfigurationError(f"asymmetric noise bounds need e1 < 0 < e2, got ({e1}, {e2})")

    def with_lipschitz(self, lipschitz: float) -> "LipschitzInterpolator":
        return LipschitzInterpolator(self.metric, lipschitz, self.noise_bound, self.noise_bounds_asym)

    def _bounds(self, data: SampleSet, x):
        if len(data) == 0:
            raise EmptyDataError("Lipschitz interpolation needs at least one sample")
        q, single = _as_queries(x, data.dim)
        lo, hi = _envelope_arrays(q, data.inputs, data.outputs, self.metric, self.lipschitz)
        if single:
            return float(lo[0]), float(hi[0])
        return lo, hi

    def ceiling(self, data: SampleSet, x):
        return self._bounds(data, x)[1]

    def floor(self, data: SampleSet, x):
        return self._bounds(data, x)[0]

    def floor_ceiling(self, data: SampleSet, x):
        return self._bounds(data, x)

    def predict(self, data: SampleSet, x):
        lo, hi = self._bounds(data, x)
        return 0.5 * hi + 0.5 * lo

    def envelope(self, data: SampleSet, x):
        """Worst-case bounds ``(floor - e, ceiling + e)`` using the symmetric noise bound."""
        if self.noise_bound is None:
            raise ConfigurationError("envelope requires noise_bound")
        lo, hi = self._bounds(data, x)
        return lo - self.noise_bound, hi + self.noise_bound

    def boundary_estimators(self, data: SampleSet, x):
        """Boundary-regression pair ``(floor - e1 - e2, ceiling + e1 + e2)``.

        The shift is ``e1 + e2`` exactly as written, so it vanishes for symmetric bounds.
        """
        if self.noise_bounds_asym is None:
            raise ConfigurationError("boundary estimators require noise_bounds_asym")
        e1, e2 = self.noise_bounds_asym
        lo, hi = self._bounds(data, x)
        return lo - e1 - e2, hi + e1 + e2

    def predict_multi(self, data: MultiOutputSampleSet, x):
        if len(data) == 0:
            raise EmptyDataError("Lipschitz interpolation needs at least one sample")
        q, single = _as_queries(x, data.dim_in)
        lo, hi = _envelope_arrays(q, data.inputs, data.outputs, self.metric, self.lipschitz)
        pred = 0.5 * hi + 0.5 * lo
        return pred[0] if single else pred

    def predictor(self, data: SampleSet) -> Callable:
        """Bind ``data`` and return ``x -> predict(data, x)``."""
        return lambda x: self.predict(data, x)


def ceiling(x, data: SampleSet, model: LipschitzInterpolator):
    return model.ceiling(data, x)


def floor(x, data: SampleSet, model: LipschitzInterpolator):
    return model.floor(data, x)


def predict(x, data: SampleSet, model: LipschitzInterpolator):
    return model.predict(data, x)


def envelope(x, data: SampleSet, model: LipschitzInterpolator):
    return model.envelope(data, x)


def boundary_estimators(x, data: SampleSet, model: LipschitzInterpolator):
    return model.boundary_estimators(data, x)


def predict_multi(x, data: MultiOutputSampleSet, model: LipschitzInterpolator):
    return model.predict_multi(data, x)


def sup_error(predictor: Callable, f_true: Callable, grid) -> float:
    """Largest absolute deviation between two vectorised functions over ``grid``.

    Both callables receive the grid as an ``(m, d)`` array and must return ``m`` values.
    """
    g = np.asarray(grid, dtype=float)
    if g.ndim == 1:
        g = g.reshape(-1, 1)
    if g.size == 0:
        raise InputError("sup_error needs a nonempty grid")
    diff = np.asarray(predictor(g), dtype=float).reshape(-1) - np.asarray(f_true(g), dtype=float).reshape(-1)
    if diff.shape[0] != g.shape[0]:
        raise DimensionError(f"callables returned {diff.shape[0]} values for {g.shape[0]} grid points")
    return float(np.max(np.abs(diff)))


def uniform_grid(lower: Sequence[float], upper: Sequence[float], points_per_axis: int) -> np.ndarray:
    """Tensor grid including the box corners, shape ``(points_per_axis ** d, d)``."""
    axes = [np.linspace(a, b, points_per_axis) for a, b in zip(lower, upper)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.reshape(-1) for m in mesh], axis=1)
