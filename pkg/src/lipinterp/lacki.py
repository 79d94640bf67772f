"""Lazily adapted Lipschitz constant (LACKI) estimation.

The estimate is the largest slack-corrected slope in the data,

    L(n) = max(0, max_{d(s, s') > 0} (|y(s) - y(s')| - lam) / d(s, s')),

which with ``lam = 2 * e_bar`` never exceeds the true best constant of the target.
Pairs at zero distance are skipped, so repeated inputs never produce an infinite slope.
"""
from __future__ import annotations

from typing import Optional

import numpy as np

from .core import HolderMetric, LipschitzInterpolator, SampleSet
from .errors import ConfigurationError, DimensionError


def _slopes(dist: np.ndarray, gaps: np.ndarray, lam: float) -> float:
    keep = dist > 0
    if not keep.any():
        return 0.0
    return float(((gaps[keep] - lam) / dist[keep]).max())


def lacki_full(data: SampleSet, lam: float, metric: HolderMetric = HolderMetric()) -> float:
    """Brute-force estimate over every pair of samples. O(n^2) memory per row block."""
    if lam < 0:
        raise ConfigurationError(f"lambda must be nonnegative, got {lam}")
    x, y = data.inputs, data.outputs
    best = 0.0
    for i in range(1, len(y)):
        dist = metric.pairwise(x[i : i + 1], x[:i])[0]
        best = max(best, _slopes(dist, np.abs(y[i] - y[:i]), lam))
    return best


class LackiState:
    """Online LACKI estimator: a growing sample set plus the running constant.

    Each :meth:`update` scans only the pairs that involve the new sample.
    """

    def __init__(self, dim: int, lam: Optional[float] = None, metric: HolderMetric = HolderMetric(),
                 noise_bound: Optional[float] = None):
        if lam is None:
            if noise_bound is None:
                raise ConfigurationError("LACKI needs lambda or a noise bound (lambda defaults to 2 * noise_bound)")
            lam = 2.0 * noise_bound
        if lam < 0:
            raise ConfigurationError(f"lambda must be nonnegative, got {lam}")
        self.lam = float(lam)
        self.metric = metric
        self.data = SampleSet(dim)
        self.current_l = 0.0

    def update(self, s, y: float) -> "LackiState":
        s = np.atleast_1d(np.asarray(s, dtype=float))
        if s.shape != (self.data.dim,):
            raise DimensionError(f"expected an input of length {self.data.dim}, got shape {s.shape}")
        if len(self.data):
            dist = self.metric.pairwise(s[None, :], self.data.inputs)[0]
            gaps = np.abs(float(y) - self.data.outputs)
            self.current_l = max(self.current_l, _slopes(dist, gaps, self.lam))
        self.data.add(s, y)
        return self

    def model(self) -> LipschitzInterpolator:
        return LipschitzInterpolator(self.metric, self.current_l)

    def predict(self, x):
        return self.model().predict(self.data, x)


def lacki_update(state: LackiState, s, y: float) -> LackiState:
    return state.update(s, y)


def lacki_predict(x, state: LackiState):
    return state.predict(x)
