"""Synthetic stationary processes with closed-form dependence structure.

Built-in models are scalar Gaussian processes. A two-dimensional series for
the bivariate statistics is obtained either by pairing two independent
draws of the same model (analytic constants available) or by the lag
pairing ``Z_i = (X_i, X_{i+1})`` (smoke tests only, no analytic truth).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.signal import lfilter

from ._rng import SeedLike, generator
from .exceptions import ConditionSViolation, ModelError, NoAnalyticTruth
from .statistic import SmoothStatistic

BURN_IN = 1000
KINDS = ("ar1", "ma", "m_dependent")


@dataclass(frozen=True)
class ProcessModel:
    """Generator specification.

    ``coefficients`` are the MA weights ``c_1..c_q`` (``c_0 = 1`` implied).
    ``m_dependent`` of a given ``order`` q is the MA(q) with unit weights, so
    ``order = 0`` is Gaussian white noise. ``mean`` shifts each coordinate.
    """

    kind: str
    phi: float = 0.0
    sigma: float = 1.0
    coefficients: tuple = ()
    order: int = 0
    dim: int = 1
    mean: tuple = ()
    pairing: str = "independent"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ModelError(f"unknown model kind {self.kind!r}; choose from {KINDS}")
        if not self.sigma > 0:
            raise ModelError(f"sigma must be positive, got {self.sigma}")
        if self.kind == "ar1" and not abs(self.phi) < 1:
            raise ModelError(f"ar1 needs |phi| < 1, got {self.phi}")
        if self.kind == "m_dependent" and self.order < 0:
            raise ModelError(f"order must be non-negative, got {self.order}")
        if self.dim not in (1, 2):
            raise ModelError("dim must be 1 or 2")
        if self.pairing not in ("independent", "lag"):
            raise ModelError(f"unknown pairing {self.pairing!r}")
        object.__setattr__(self, "coefficients", tuple(float(c) for c in self.coefficients))
        mean = tuple(float(m) for m in self.mean) or (0.0,) * self.dim
        if len(mean) != self.dim:
            raise ModelError(f"mean must have {self.dim} entries, got {len(mean)}")
        object.__setattr__(self, "mean", mean)

    @classmethod
    def ar1(cls, phi: float, sigma: float = 1.0, **kw) -> "ProcessModel":
        return cls("ar1", phi=phi, sigma=sigma, **kw)

    @classmethod
    def ma(cls, coefficients, sigma: float = 1.0, **kw) -> "ProcessModel":
        return cls("ma", coefficients=tuple(coefficients), sigma=sigma, **kw)

    @classmethod
    def m_dependent(cls, order: int, sigma: float = 1.0, **kw) -> "ProcessModel":
        return cls("m_dependent", order=order, sigma=sigma, **kw)

    @classmethod
    def from_dict(cls, raw: dict) -> "ProcessModel":
        raw = dict(raw)
        try:
            kind = raw.pop("kind")
        except KeyError:
            raise ModelError("model needs a 'kind'") from None
        allowed = {"phi", "sigma", "coefficients", "order", "dim", "mean", "pairing"}
        unknown = set(raw) - allowed
        if unknown:
            raise ModelError(f"unknown model fields: {sorted(unknown)}")
        if "coefficients" in raw:
            raw["coefficients"] = tuple(raw["coefficients"])
        if "mean" in raw:
            m = raw["mean"]
            raw["mean"] = tuple(m) if isinstance(m, (list, tuple)) else (m,) * raw.get("dim", 1)
        return cls(kind, **raw)

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "sigma": self.sigma}
        if self.kind == "ar1":
            out["phi"] = self.phi
        elif self.kind == "ma":
            out["coefficients"] = list(self.coefficients)
        else:
            out["order"] = self.order
        if self.dim != 1:
            out["dim"] = self.dim
            out["pairing"] = self.pairing
        if any(self.mean):
            out["mean"] = list(self.mean)
        return out

    @property
    def ma_weights(self) -> np.ndarray:
        """Full MA weight vector ``(c_0, ..., c_q)`` for the MA-type kinds."""
        if self.kind == "ma":
            return np.array((1.0,) + self.coefficients)
        if self.kind == "m_dependent":
            return np.ones(self.order + 1)
        raise AttributeError("ar1 has no finite MA representation")


def _scalar_draw(model: ProcessModel, n: int, rng: np.random.Generator) -> np.ndarray:
    if model.kind == "ar1":
        phi, sigma = model.phi, model.sigma
        x0 = rng.standard_normal() * sigma / math.sqrt(1.0 - phi * phi)
        eps = sigma * rng.standard_normal(BURN_IN + n)
        x, _ = lfilter([1.0], [1.0, -phi], eps, zi=[phi * x0])
        return x[BURN_IN:]
    c = model.ma_weights
    eps = model.sigma * rng.standard_normal(n + len(c) - 1)
    return np.convolve(eps, c, mode="valid")


def generate(model: ProcessModel, n: int, seed: SeedLike) -> np.ndarray:
    """Draw a stationary stretch of length ``n``; shape ``(n, model.dim)``.

    The output is a pure function of ``(model, n, seed)``.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    rng = generator(seed)
    if model.dim == 1:
        cols = [_scalar_draw(model, n, rng)]
    elif model.pairing == "independent":
        cols = [_scalar_draw(model, n, rng), _scalar_draw(model, n, rng)]
    else:
        x = _scalar_draw(model, n + 1, rng)
        cols = [x[:-1], x[1:]]
    return np.column_stack(cols) + np.asarray(model.mean)


def true_autocovariance(model: ProcessModel, k: int) -> float:
    """Autocovariance ``r(k)`` of one scalar coordinate."""
    k = abs(int(k))
    if model.kind == "ar1":
        return model.sigma ** 2 * model.phi ** k / (1.0 - model.phi ** 2)
    c = model.ma_weights
    if k >= len(c):
        return 0.0
    return float(model.sigma ** 2 * np.dot(c[: len(c) - k], c[k:]))


@dataclass(frozen=True)
class TheoreticalConstants:
    """Population quantities driving the MSE-optimal block length.

    ``V0 = (4/3) * sigma_inf_sq**2`` and ``C0 = (2 B0^2 / V0)^(1/3)``.
    """

    sigma_inf_sq: float
    B0: float
    V0: float
    C0: float = field(init=False)

    def __post_init__(self):
        if self.B0 == 0:
            raise ConditionSViolation("B0 = 0: the bias constant vanishes")
        if not self.V0 > 0:
            raise ConditionSViolation(f"V0 must be positive, got {self.V0}")
        object.__setattr__(self, "C0", (2.0 * self.B0 ** 2 / self.V0) ** (1.0 / 3.0))

    @classmethod
    def from_sums(cls, sigma_inf_sq: float, B0: float) -> "TheoreticalConstants":
        return cls(sigma_inf_sq, B0, 4.0 / 3.0 * sigma_inf_sq ** 2)


def _scalar_sums(model: ProcessModel) -> tuple[float, float]:
    """Closed forms of ``sum_k r(k)`` and ``sum_k |k| r(k)`` over all integers."""
    s2 = model.sigma ** 2
    if model.kind == "ar1":
        phi = model.phi
        return s2 / (1.0 - phi) ** 2, 2.0 * s2 * phi / ((1.0 - phi ** 2) * (1.0 - phi) ** 2)
    c = model.ma_weights
    q = len(c) - 1
    total = s2 * c.sum() ** 2
    weighted = 2.0 * sum(k * true_autocovariance(model, k) for k in range(1, q + 1))
    return float(total), float(weighted)


def theoretical_constants(model: ProcessModel, statistic: Optional[SmoothStatistic] = None) -> TheoreticalConstants:
    """Closed-form ``sigma_inf^2``, ``B0``, ``V0`` and ``C0``.

    For two-dimensional models built from independent pairs the projected
    covariance is ``|g|^2 r(k)`` with ``g`` the gradient of the statistic at
    the model mean.

    Raises
    ------
    ConditionSViolation
        If ``B0 = 0`` (white noise, a zero gradient at the mean, ...).
    NoAnalyticTruth
        For lag-paired models.
    """
    total, weighted = _scalar_sums(model)
    if model.dim == 2:
        if model.pairing != "independent":
            raise NoAnalyticTruth("lag-paired series have no closed-form constants")
        if statistic is None or statistic.dim != 2:
            raise NoAnalyticTruth("a two-dimensional model needs a bivariate statistic")
        g = np.asarray(statistic.gradient(np.asarray(model.mean)), dtype=float)
        scale = float(g @ g)
        total, weighted = scale * total, scale * weighted
    elif statistic is not None and not statistic.is_mean:
        raise NoAnalyticTruth(f"statistic {statistic.name!r} needs a two-dimensional model")
    return TheoreticalConstants.from_sums(total, weighted)


def optimal_block_approx(constants: TheoreticalConstants, n: int) -> float:
    """Unrounded asymptotic optimum ``C0 * n^(1/3)``."""
    return constants.C0 * n ** (1.0 / 3.0)
