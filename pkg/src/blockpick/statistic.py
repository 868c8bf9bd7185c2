"""Smooth function model statistics ``theta_hat = H(mean(X))``."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .exceptions import DimensionError
from .series import as_series

_RATIO_EPS = 1e-8


@dataclass(frozen=True)
class SmoothStatistic:
    """A map ``H: R^d -> R`` with its analytic gradient.

    ``evaluate`` and ``gradient`` act on the last axis, so both accept a
    single point of shape ``(d,)`` or a stack of points ``(..., d)``.
    """

    name: str
    dim: int
    evaluate: Callable[[np.ndarray], np.ndarray]
    gradient: Callable[[np.ndarray], np.ndarray]

    @property
    def is_mean(self) -> bool:
        return self.name == "mean" and self.dim == 1


def _mean_eval(x):
    return np.asarray(x, dtype=float)[..., 0]


def _mean_grad(x):
    return np.ones_like(np.asarray(x, dtype=float))


def _product_eval(x):
    x = np.asarray(x, dtype=float)
    return x[..., 0] * x[..., 1]


def _product_grad(x):
    x = np.asarray(x, dtype=float)
    return np.stack([x[..., 1], x[..., 0]], axis=-1)


def _check_denominator(den):
    if np.any(np.abs(den) < _RATIO_EPS):
        raise ZeroDivisionError("ratio statistic: denominator mean is (numerically) zero")


def _ratio_eval(x):
    x = np.asarray(x, dtype=float)
    _check_denominator(x[..., 1])
    return x[..., 0] / x[..., 1]


def _ratio_grad(x):
    x = np.asarray(x, dtype=float)
    _check_denominator(x[..., 1])
    return np.stack([1.0 / x[..., 1], -x[..., 0] / x[..., 1] ** 2], axis=-1)


_BUILTINS = {
    "mean": (1, _mean_eval, _mean_grad),
    "coordinate_product": (2, _product_eval, _product_grad),
    "ratio": (2, _ratio_eval, _ratio_grad),
}

STATISTIC_NAMES = tuple(_BUILTINS)


def builtin_statistic(name: str) -> SmoothStatistic:
    """Return one of the built-in statistics: ``mean``, ``coordinate_product`` or ``ratio``."""
    try:
        dim, ev, gr = _BUILTINS[name]
    except KeyError:
        raise ValueError(f"unknown statistic {name!r}; choose from {STATISTIC_NAMES}") from None
    return SmoothStatistic(name, dim, ev, gr)


def _checked(H: SmoothStatistic, series) -> np.ndarray:
    x = as_series(series, min_length=1)
    if x.shape[1] != H.dim:
        raise DimensionError(f"statistic {H.name!r} expects d={H.dim}, series has d={x.shape[1]}")
    return x


def statistic_value(H: SmoothStatistic, series) -> float:
    x = _checked(H, series)
    return float(H.evaluate(x.mean(axis=0)))


def project_series(H: SmoothStatistic, series, anchor: str = "sample_mean", point=None) -> np.ndarray:
    """Scalar projection ``Y_i = g'X_i`` with ``g`` the gradient of ``H``.

    ``g`` is taken at the sample mean, or at ``point`` when ``anchor`` is
    ``"given_point"`` (useful when the true mean is known).
    """
    x = _checked(H, series)
    if anchor == "sample_mean":
        at = x.mean(axis=0)
    elif anchor == "given_point":
        if point is None:
            raise ValueError("anchor='given_point' requires point")
        at = np.atleast_1d(np.asarray(point, dtype=float))
        if at.shape != (H.dim,):
            raise DimensionError(f"point must have shape ({H.dim},), got {at.shape}")
    else:
        raise ValueError(f"unknown anchor {anchor!r}")
    g = np.asarray(H.gradient(at), dtype=float)
    return x @ g
