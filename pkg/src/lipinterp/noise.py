"""Bounded noise families with a controllable boundary exponent ``eta``.

Every model draws from ``[-e_bar, e_bar]``. The boundary exponent describes how much
mass sits close to the support edge, ``P(e > e_bar - eps) >= gamma * eps ** eta``.

``power_boundary`` is the reference family: ``e = S * e_bar * (1 - U ** (1 / eta))``
with a random sign ``S``, whose upper tail is exactly ``0.5 * (eps / e_bar) ** eta``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .errors import CapabilityError, ConfigurationError

KINDS = ("uniform", "truncated_gaussian", "power_boundary", "weibull_mixture")


@dataclass(frozen=True)
class NoiseModel:
    kind: str
    e_bar: float
    eta: Optional[float] = None
    gamma: Optional[float] = None
    sigma: Optional[float] = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"unknown noise kind {self.kind!r}; expected one of {KINDS}")
        if not (self.e_bar > 0) or math.isinf(self.e_bar):
            raise ConfigurationError(f"noise bound e_bar must be positive and finite, got {self.e_bar!r}")
        if self.eta is not None and not (self.eta > 0):
            raise ConfigurationError(f"boundary exponent eta must be positive, got {self.eta!r}")
        if self.sigma is not None and not (self.sigma > 0):
            raise ConfigurationError(f"sigma must be positive, got {self.sigma!r}")

    def sample(self, rng: np.random.Generator, size=None):
        """Draw ``size`` i.i.d. values (a float when ``size`` is None)."""
        n = 1 if size is None else int(np.prod(size))
        draws = _SAMPLERS[self.kind](self, rng, n)
        if size is None:
            return float(draws[0])
        return draws.reshape(size)

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "e_bar": self.e_bar}
        if self.kind == "power_boundary":
            out["eta"] = self.eta
        if self.kind == "truncated_gaussian":
            out["sigma"] = self.sigma
        if self.kind == "weibull_mixture":
            out["params"] = dict(self.params)
        return out


def _sample_uniform(m, rng, n):
    return rng.uniform(-m.e_bar, m.e_bar, n)


def _sample_power(m, rng, n):
    sign = np.where(rng.random(n) < 0.5, -1.0, 1.0)
    u = rng.random(n)
    return sign * m.e_bar * (1.0 - u ** (1.0 / m.eta))


def _sample_truncated_gaussian(m, rng, n):
    out = np.empty(n)
    filled = 0
    while filled < n:
        # acceptance rate is at least P(|Z| <= e_bar / sigma); oversample accordingly
        batch = rng.normal(0.0, m.sigma, max(16, 2 * (n - filled)))
        batch = batch[np.abs(batch) <= m.e_bar]
        take = min(len(batch), n - filled)
        out[filled : filled + take] = batch[:take]
        filled += take
    return out


def _truncated_weibull(rng, n, shape, scale, upper):
    # inverse CDF restricted to [0, upper]
    cap = -math.expm1(-((upper / scale) ** shape))
    u = rng.random(n) * cap
    return scale * (-np.log1p(-u)) ** (1.0 / shape)


def _sample_weibull_mixture(m, rng, n):
    p = m.params
    weight = p.get("weight", 0.5)
    upper = rng.random(n) < weight
    hi = m.e_bar - _truncated_weibull(rng, n, p.get("shape_upper", m.eta or 1.0), p.get("scale_upper", m.e_bar), 2 * m.e_bar)
    lo = -m.e_bar + _truncated_weibull(rng, n, p.get("shape_lower", m.eta or 1.0), p.get("scale_lower", m.e_bar), 2 * m.e_bar)
    return np.where(upper, hi, lo)


_SAMPLERS = {
    "uniform": _sample_uniform,
    "power_boundary": _sample_power,
    "truncated_gaussian": _sample_truncated_gaussian,
    "weibull_mixture": _sample_weibull_mixture,
}


def make_uniform(e_bar: float) -> NoiseModel:
    return NoiseModel("uniform", e_bar, eta=1.0, gamma=1.0 / (2.0 * e_bar))


def make_power_boundary(e_bar: float, eta: float) -> NoiseModel:
    if not (e_bar > 0 and eta > 0):
        raise ConfigurationError(f"power_boundary needs e_bar > 0 and eta > 0, got ({e_bar}, {eta})")
    return NoiseModel("power_boundary", e_bar, eta=float(eta), gamma=1.0 / (2.0 * e_bar ** eta))


def make_truncated_gaussian(e_bar: float, sigma: Optional[float] = None) -> NoiseModel:
    # density bounded away from zero on the support, hence eta = 1; gamma left unset
    return NoiseModel("truncated_gaussian", e_bar, eta=1.0, sigma=float(sigma if sigma is not None else e_bar))


def make_weibull_mixture(e_bar: float, shape: float = 2.0, scale: Optional[float] = None, weight: float = 0.5) -> NoiseModel:
    """Illustrative two-sided truncated Weibull mixture; mass near each edge scales like ``eps ** shape``."""
    scale = e_bar if scale is None else scale
    params = {"weight": weight, "shape_upper": shape, "shape_lower": shape, "scale_upper": scale, "scale_lower": scale}
    return NoiseModel("weibull_mixture", e_bar, eta=float(shape), params=params)


def noise_from_config(cfg: Optional[dict]) -> Optional[NoiseModel]:
    """Build a model from a tagged record ``{kind, e_bar, eta?, sigma?, params?}``; ``None`` means noiseless."""
    if cfg is None:
        return None
    kind = cfg.get("kind")
    e_bar = cfg.get("e_bar")
    if kind == "uniform":
        return make_uniform(e_bar)
    if kind == "power_boundary":
        return make_power_boundary(e_bar, cfg.get("eta", 1.0))
    if kind == "truncated_gaussian":
        return make_truncated_gaussian(e_bar, cfg.get("sigma"))
    if kind == "weibull_mixture":
        params = dict(cfg.get("params") or {})
        shape = params.pop("shape", cfg.get("eta", 2.0))
        model = make_weibull_mixture(e_bar, shape=shape, scale=params.pop("scale", None), weight=params.pop("weight", 0.5))
        if params:
            model = NoiseModel(model.kind, model.e_bar, eta=model.eta, params={**model.params, **params})
        return model
    raise ConfigurationError(f"unknown noise kind {kind!r}; expected one of {KINDS}")


def sample_noise(model: Optional[NoiseModel], rng: np.random.Generator, size=None):
    if model is None:
        return 0.0 if size is None else np.zeros(size)
    return model.sample(rng, size)


def boundary_mass(model: NoiseModel, epsilon: float) -> float:
    """Exact ``P(e > e_bar - epsilon)`` for ``0 < epsilon <= 2 * e_bar``."""
    e = model.e_bar
    if not (0 < epsilon <= 2 * e):
        raise ConfigurationError(f"epsilon must lie in (0, {2 * e}], got {epsilon}")
    if model.kind == "uniform":
        return epsilon / (2 * e)
    if model.kind == "power_boundary":
        if epsilon <= e:
            return 0.5 * (epsilon / e) ** model.eta
        return 0.5 + 0.5 * (1.0 - (2.0 - epsilon / e) ** model.eta)
    raise CapabilityError(f"no closed-form tail for noise kind {model.kind!r}")


@dataclass
class EtaCheckRow:
    epsilon: float
    upper_freq: float
    lower_freq: float
    bound: float
    margin: float

    @property
    def passed(self) -> bool:
        floor = self.bound - self.margin
        return self.upper_freq >= floor and self.lower_freq >= floor


@dataclass
class EtaCheckReport:
    kind: str
    eta: float
    gamma: float
    n_draws: int
    rows: List[EtaCheckRow]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)


def empirical_eta_check(model: NoiseModel, n_draws: int, epsilons: Sequence[float], rng: np.random.Generator,
                        eta: Optional[float] = None, gamma: Optional[float] = None) -> EtaCheckReport:
    """Compare empirical edge frequencies against ``gamma * eps ** eta``.

    ``eta`` and ``gamma`` default to the model's own; pass other values to test a claim.
    Each frequency may fall below the bound by at most three binomial standard deviations.
    """
    if n_draws < 10_000:
        raise ConfigurationError(f"n_draws must be at least 1e4, got {n_draws}")
    eta = model.eta if eta is None else eta
    gamma = model.gamma if gamma is None else gamma
    if eta is None or gamma is None:
        raise CapabilityError(f"noise kind {model.kind!r} carries no (eta, gamma); pass them explicitly")
    draws = model.sample(rng, n_draws)
    rows = []
    for eps in epsilons:
        bound = min(1.0, gamma * eps ** eta)
        margin = 3.0 * math.sqrt(bound * (1.0 - bound) / n_draws)
        rows.append(EtaCheckRow(
            epsilon=float(eps),
            upper_freq=float(np.mean(draws > model.e_bar - eps)),
            lower_freq=float(np.mean(draws < -model.e_bar + eps)),
            bound=bound,
            margin=margin,
        ))
    return EtaCheckReport(model.kind, float(eta), float(gamma), int(n_draws), rows)
