"""Politis-White style plug-in selection with a flat-top lag window.

Both covariance sums in the optimal block length are estimated from the
projected series ``Y_i = g'X_i`` (``g`` the gradient of ``H`` at the sample
mean) with the trapezoidal flat-top window over lags ``|k| <= 2M``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exceptions import BlockLengthError, DegenerateEstimateError
from .selection import BlockSelection, finalize_block, plug_in_block
from .series import as_series, demean
from .statistic import SmoothStatistic, project_series


@dataclass
class PwConfig:
    M: Optional[int] = None
    tau: float = 0.2

    def bandwidth(self, n: int) -> int:
        if self.M is not None:
            return int(self.M)
        if not 0.1 <= self.tau <= 1.0 / 3.0:
            raise ValueError(f"tau must lie in [0.1, 1/3], got {self.tau}")
        return math.ceil(n ** self.tau)

    def validate(self, n: int) -> None:
        M = self.bandwidth(n)
        if M < 1 or 2 * M > n - 1:
            raise BlockLengthError(f"bandwidth M={M} needs 1 <= 2M <= n-1 = {n - 1}")


def flat_top_lambda(t):
    """Trapezoid: 1 on ``|t| <= 1/2``, ``2(1-|t|)`` on ``(1/2, 1]``, 0 beyond."""
    a = np.abs(np.asarray(t, dtype=float))
    out = np.where(a <= 0.5, 1.0, np.where(a <= 1.0, 2.0 * (1.0 - a), 0.0))
    return float(out) if out.ndim == 0 else out


def sample_autocov(series, k: int) -> np.ndarray:
    """Lag-``k`` autocovariance matrix with divisor ``n``; ``r(-k) = r(k)'``."""
    x = as_series(series, min_length=1)
    n = x.shape[0]
    if abs(k) > n - 1:
        raise BlockLengthError(f"|k|={abs(k)} exceeds n-1={n - 1}")
    z = demean(x)
    lag = abs(k)
    r = z[: n - lag].T @ z[lag:] / n
    return r.T if k < 0 else r


def _autocov_scalar(y: np.ndarray, max_lag: int) -> np.ndarray:
    n = y.shape[0]
    z = demean(y)
    return np.array([z[: n - k] @ z[k:] / n for k in range(max_lag + 1)])


def weighted_sums(r: np.ndarray, M: int) -> tuple[float, float]:
    """Flat-top sums ``sum_k lambda(k/2M)|k| r(k)`` and ``sum_k lambda(k/2M) r(k)``.

    ``r`` holds ``r(0), ..., r(2M)`` of a scalar series; negative lags enter by symmetry.
    """
    k = np.arange(1, 2 * M + 1)
    w = flat_top_lambda(k / (2.0 * M))
    B0 = 2.0 * float(np.sum(w * k * r[1: 2 * M + 1]))
    G = float(r[0] + 2.0 * np.sum(w * r[1: 2 * M + 1]))
    return B0, G


def pw_estimates(series, H: SmoothStatistic, M: int) -> tuple[float, float, float]:
    """``(B0_hat, G_hat, V0_hat)`` with ``V0_hat = (4/3) G_hat^2``."""
    x = as_series(series)
    n = x.shape[0]
    if M < 1 or 2 * M > n - 1:
        raise BlockLengthError(f"bandwidth M={M} needs 1 <= 2M <= n-1 = {n - 1}")
    y = project_series(H, x, anchor="sample_mean")
    B0, G = weighted_sums(_autocov_scalar(y, 2 * M), M)
    return B0, G, 4.0 / 3.0 * G * G


def pw_select(series, H: SmoothStatistic, config: Optional[PwConfig] = None) -> BlockSelection:
    """Flat-top plug-in block length.

    Raises :class:`DegenerateEstimateError` when the long-run variance
    estimate is not positive; a vanishing ``B0_hat`` gives block length 1
    flagged ``degenerate``.
    """
    config = config or PwConfig()
    x = as_series(series)
    n = x.shape[0]
    config.validate(n)
    M = config.bandwidth(n)
    B0, G, V0 = pw_estimates(x, H, M)
    diag = {"B0_hat": B0, "G_hat": G, "V0_hat": V0, "M": M}
    if not G > 0:
        raise DegenerateEstimateError(f"long-run variance estimate G_hat={G} is not positive (M={M} too large?)")
    if B0 == 0.0:
        return BlockSelection("pw", 1, n, 0.0, degenerate=True, diagnostics=diag)
    raw = plug_in_block(B0, V0, n)
    return BlockSelection("pw", finalize_block(raw, n), n, raw, diagnostics=diag)
