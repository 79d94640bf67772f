"""
Monte-Carlo convergence studies for Lipschitz interpolation and LACKI.

Every (sample size, repetition) cell draws from its own generator seeded by
``SeedSequence([seed, n, rep])``, so results do not depend on evaluation order or on
how many workers run the cells.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .core import HolderMetric, LipschitzInterpolator, SampleSet, sup_error, uniform_grid
from .errors import ConfigurationError, DegenerateDataError
from .lacki import LackiState
from .noise import NoiseModel, make_uniform, sample_noise
from .tables import read_csv, write_csv

LI_FASTER = "li_faster"
COMPARABLE = "comparable"
LI_SLOWER = "li_slower"


@dataclass(frozen=True)
class Target:
    """Regression target on a box.

    ``grad_bound[k]`` bounds ``|df/dx_k|`` and all bounds are attained at a common
    point, so the best Lipschitz constant w.r.t. ``||.||_p`` is the dual norm of it.
    """

    name: str
    fn: Callable[[np.ndarray], np.ndarray]
    lower: Tuple[float, ...]
    upper: Tuple[float, ...]
    grad_bound: Tuple[float, ...]

    @property
    def dim(self) -> int:
        return len(self.lower)

    def __call__(self, x):
        return self.fn(np.asarray(x, dtype=float).reshape(-1, self.dim))

    def lipschitz_constant(self, metric: HolderMetric = HolderMetric()) -> float:
        """Best constant for ``alpha = 1``; for ``alpha < 1`` a valid Hölder constant via the box diameter."""
        g = np.asarray(self.grad_bound)
        span = np.asarray(self.upper) - np.asarray(self.lower)
        p = metric.p
        if p == 1:
            dual = g.max()
        elif p == math.inf:
            dual = g.sum()
        else:
            q = p / (p - 1.0)
            dual = (g ** q).sum() ** (1.0 / q)
        diam = HolderMetric(p, 1.0).distance(np.zeros_like(span), span)
        return float(dual * diam ** (1.0 - metric.alpha))


def _chirp(x):
    x = x[:, 0]
    return np.sqrt(x) * np.sin(2 * x * x) + 0.5 * x


# max |f'| of sqrt(x) sin(2x^2) + 0.5x on [0, 2], attained near x = 1.79403
CHIRP_LIPSCHITZ = 10.055413545918812

TARGETS: Dict[str, Target] = {
    "chirp": Target("chirp", _chirp, (0.0,), (2.0,), (CHIRP_LIPSCHITZ,)),
    "sin": Target("sin", lambda x: np.sin(x[:, 0]), (0.0,), (math.pi,), (1.0,)),
    "sin2d": Target("sin2d", lambda x: 0.5 * (np.sin(x[:, 0]) + np.sin(x[:, 1])), (0.0, 0.0), (math.pi, math.pi), (0.5, 0.5)),
}


def get_target(name: str) -> Target:
    try:
        return TARGETS[name]
    except KeyError:
        raise ConfigurationError(f"unknown target {name!r}; known targets: {sorted(TARGETS)}") from None


@dataclass(frozen=True)
class RateSpec:
    d: int
    alpha: float
    eta: float

    def __post_init__(self):
        if self.d < 1 or not (0 < self.alpha <= 1) or not (self.eta > 0):
            raise ConfigurationError(f"invalid rate spec: d={self.d}, alpha={self.alpha}, eta={self.eta}")


def theoretical_rate(spec: RateSpec):
    """Return ``(exponent, rate_fn)`` with ``rate_fn(n) = (log n / n) ** exponent`` for ``n >= 2``."""
    exponent = spec.alpha / (spec.d + spec.eta * spec.alpha)

    def rate_fn(n):
        n = np.asarray(n, dtype=float)
        if np.any(n < 2):
            raise ConfigurationError("the rate is defined for n >= 2 only")
        return (np.log(n) / n) ** exponent

    return exponent, rate_fn


def eta_condition(spec: RateSpec) -> str:
    """Compare the LI exponent with the Gaussian-tail optimum ``alpha / (d + 2 alpha)``.

    Since ``alpha > 0`` the comparison reduces to ``eta`` against 2, which is done
    directly to avoid rounding in the two quotients.
    """
    if spec.eta < 2:
        return LI_FASTER
    if spec.eta == 2:
        return COMPARABLE
    return LI_SLOWER


@dataclass
class ConvergenceStudyConfig:
    """Defaults: chirp target, U([-0.5, 0.5]) noise, L = 1.1 L*, n = 2^7..2^15, 20 repetitions."""

    target: str = "chirp"
    metric: HolderMetric = HolderMetric()
    lipschitz: Optional[float] = None
    noise: Optional[NoiseModel] = field(default_factory=lambda: make_uniform(0.5))
    sample_sizes: Sequence[int] = tuple(2 ** k for k in range(7, 16))
    repetitions: int = 20
    grid_points: Optional[int] = None
    seed: int = 0

    def __post_init__(self):
        tgt = get_target(self.target)
        ns = list(self.sample_sizes)
        if not ns or any(int(n) != n or n < 1 for n in ns) or any(b <= a for a, b in zip(ns, ns[1:])):
            raise ConfigurationError(f"sample_sizes must be strictly increasing positive integers, got {ns}")
        self.sample_sizes = tuple(int(n) for n in ns)
        if self.repetitions < 1:
            raise ConfigurationError(f"repetitions must be >= 1, got {self.repetitions}")
        if self.grid_points is None:
            self.grid_points = 2000 if tgt.dim == 1 else 10_000
        if self.grid_points < 100:
            raise ConfigurationError(f"grid_points must be >= 100, got {self.grid_points}")
        if self.lipschitz is None:
            self.lipschitz = 1.1 * tgt.lipschitz_constant(self.metric)
        if self.lipschitz < 0:
            raise ConfigurationError(f"lipschitz must be nonnegative, got {self.lipschitz}")

    @property
    def target_fn(self) -> Target:
        return get_target(self.target)

    def grid(self) -> np.ndarray:
        tgt = self.target_fn
        per_axis = max(2, int(round(self.grid_points ** (1.0 / tgt.dim))))
        return uniform_grid(tgt.lower, tgt.upper, per_axis)

    def rate_spec(self) -> Optional[RateSpec]:
        if self.noise is None or self.noise.eta is None:
            return None
        return RateSpec(self.target_fn.dim, self.metric.alpha, self.noise.eta)


@dataclass
class StudyResult:
    """Sup-norm errors, ``errors[i, r]`` for ``sample_sizes[i]`` and repetition ``r``."""

    sample_sizes: np.ndarray
    errors: np.ndarray

    @property
    def mean(self) -> np.ndarray:
        return self.errors.mean(axis=1)

    @property
    def std(self) -> np.ndarray:
        if self.errors.shape[1] < 2:
            return np.zeros(len(self.sample_sizes))
        return self.errors.std(axis=1, ddof=1)

    def rows(self):
        for n, m, s, errs in zip(self.sample_sizes, self.mean, self.std, self.errors):
            yield int(n), float(m), float(s), errs.tolist()

    def __eq__(self, other):
        return (isinstance(other, StudyResult)
                and np.array_equal(self.sample_sizes, other.sample_sizes)
                and np.array_equal(self.errors, other.errors))


def draw_samples(target: Target, n: int, noise: Optional[NoiseModel], rng: np.random.Generator):
    x = rng.uniform(target.lower, target.upper, size=(n, target.dim))
    y = target(x) + sample_noise(noise, rng, n)
    return x, y


def _map(fn, items, workers: int):
    if workers <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def run_convergence_study(config: ConvergenceStudyConfig, workers: int = 1) -> StudyResult:
    tgt = config.target_fn
    grid = config.grid()
    truth = tgt(grid)
    model = LipschitzInterpolator(config.metric, config.lipschitz)

    def cell(key):
        n, rep = key
        rng = np.random.default_rng(np.random.SeedSequence([config.seed, n, rep]))
        x, y = draw_samples(tgt, n, config.noise, rng)
        data = SampleSet(tgt.dim, x, y)
        return sup_error(lambda g: model.predict(data, g), lambda g: truth, grid)

    keys = [(n, r) for n in config.sample_sizes for r in range(config.repetitions)]
    errs = np.array(_map(cell, keys, workers)).reshape(len(config.sample_sizes), config.repetitions)
    return StudyResult(np.array(config.sample_sizes), errs)


def loglog_slope(x, y) -> Tuple[float, float]:
    """Least-squares line through ``(log x, log y)``; returns ``(slope, intercept)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 3:
        raise DegenerateDataError(f"need at least 3 points for a slope fit, got {len(x)}")
    if np.any(x <= 0) or np.any(y <= 0) or not np.all(np.isfinite(y)):
        raise DegenerateDataError("log-log fit needs strictly positive finite values")
    lx, ly = np.log(x), np.log(y)
    cx = lx - lx.mean()
    slope = float((cx * (ly - ly.mean())).sum() / (cx * cx).sum())
    return slope, float(ly.mean() - slope * lx.mean())


def fit_loglog_slope(result: StudyResult) -> Tuple[float, float]:
    return loglog_slope(result.sample_sizes, result.mean)


@dataclass
class LackiStudyResult:
    """LACKI estimates ``estimates[i, r]`` after ``sample_sizes[i]`` samples of repetition ``r``."""

    sample_sizes: np.ndarray
    estimates: np.ndarray
    l_star: float

    @property
    def mean_estimate(self) -> np.ndarray:
        return self.estimates.mean(axis=1)

    @property
    def mean_abs_error(self) -> np.ndarray:
        return np.abs(self.estimates - self.l_star).mean(axis=1)

    def __eq__(self, other):
        return (isinstance(other, LackiStudyResult)
                and np.array_equal(self.sample_sizes, other.sample_sizes)
                and np.array_equal(self.estimates, other.estimates)
                and self.l_star == other.l_star)


def run_lacki_study(config: ConvergenceStudyConfig, lam: Optional[float] = None, workers: int = 1) -> LackiStudyResult:
    """Stream samples into a LACKI estimator and record ``L(n)`` at each configured ``n``.

    Sample sets are nested within a repetition, so each row of a repetition is the
    estimate on a prefix of the same stream. ``lam`` defaults to twice the noise bound.
    """
    tgt = config.target_fn
    if lam is None:
        if config.noise is None:
            raise ConfigurationError("lambda is required for noiseless LACKI studies")
        lam = 2.0 * config.noise.e_bar
    checkpoints = set(config.sample_sizes)
    n_max = config.sample_sizes[-1]

    def rep_run(rep):
        rng = np.random.default_rng(np.random.SeedSequence([config.seed, n_max, rep]))
        x, y = draw_samples(tgt, n_max, config.noise, rng)
        state = LackiState(tgt.dim, lam, config.metric)
        out = []
        for i in range(n_max):
            state.update(x[i], y[i])
            if i + 1 in checkpoints:
                out.append(state.current_l)
        return out

    est = np.array(_map(rep_run, range(config.repetitions), workers)).T
    return LackiStudyResult(np.array(config.sample_sizes), est, tgt.lipschitz_constant(config.metric))


# tabular interchange -------------------------------------------------------------

STUDY_HEADER = ("n", "rep", "sup_error")
SUMMARY_HEADER = ("n", "mean", "std", "theoretical_rate")
LACKI_HEADER = ("n", "rep", "lipschitz_estimate", "abs_error")
LACKI_SUMMARY_HEADER = ("n", "mean_estimate", "mean_abs_error", "l_star")


def study_rows(result: StudyResult):
    for n, row in zip(result.sample_sizes.tolist(), result.errors.tolist()):
        for rep, err in enumerate(row):
            yield n, rep, err


def summary_rows(result: StudyResult, exponent: Optional[float] = None):
    for n, m, s, _ in result.rows():
        rate = (math.log(n) / n) ** exponent if exponent is not None and n >= 2 else math.nan
        yield n, m, s, rate


def lacki_rows(result: LackiStudyResult):
    for n, row in zip(result.sample_sizes.tolist(), result.estimates.tolist()):
        for rep, est in enumerate(row):
            yield n, rep, est, abs(est - result.l_star)


def lacki_summary_rows(result: LackiStudyResult):
    for n, m, e in zip(result.sample_sizes.tolist(), result.mean_estimate.tolist(), result.mean_abs_error.tolist()):
        yield n, m, e, result.l_star


def write_study_csv(result: StudyResult, path):
    write_csv(path, STUDY_HEADER, study_rows(result))


def write_summary_csv(result: StudyResult, path, exponent: Optional[float] = None):
    write_csv(path, SUMMARY_HEADER, summary_rows(result, exponent))


def read_study_csv(path) -> StudyResult:
    records = read_csv(path)
    if records and list(records[0]) != list(STUDY_HEADER):
        raise ConfigurationError(f"{path}: expected header {','.join(STUDY_HEADER)}")
    cells: Dict[int, Dict[int, float]] = {}
    for row in records:
        cells.setdefault(int(row["n"]), {})[int(row["rep"])] = float(row["sup_error"])
    ns = sorted(cells)
    return StudyResult(np.array(ns), np.array([[cells[n][r] for r in sorted(cells[n])] for n in ns]))


def read_lacki_csv(path, l_star: float) -> LackiStudyResult:
    cells: Dict[int, Dict[int, float]] = {}
    for row in read_csv(path):
        cells.setdefault(int(row["n"]), {})[int(row["rep"])] = float(row["lipschitz_estimate"])
    ns = sorted(cells)
    return LackiStudyResult(np.array(ns), np.array([[cells[n][r] for r in sorted(cells[n])] for n in ns]), l_star)
