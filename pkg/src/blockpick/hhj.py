"""Subsampling (Hall-Horowitz-Jing) block-length selection.

The MSE of the MBB variance estimator at subsample length ``m`` is estimated
by averaging, over all length-``m`` subsamples, the squared deviation of the
subsample estimate from a centre value. The minimiser ``b_hat`` is then
scaled up to the full sample by ``(n/m)^(1/3)``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._rng import SeedLike, seed_sequence
from .exceptions import BlockLengthError
from .mbb import centred_block_means, mbb_variance, mbb_variance_general
from .selection import BlockSelection, finalize_block
from .series import as_series
from .statistic import SmoothStatistic


@dataclass
class MseCurve:
    """Block length -> MSE estimate, with optional Monte Carlo standard errors."""

    entries: dict
    m: int
    kind: str = "empirical"
    se: Optional[dict] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.entries:
            raise ValueError("an MSE curve needs at least one entry")
        if self.kind not in ("empirical", "oracle", "true_mc", "analytic"):
            raise ValueError(f"unknown curve kind {self.kind!r}")

    @property
    def block_lengths(self) -> list:
        return sorted(self.entries)

    def argmin(self) -> int:
        """Minimising block length, smallest one on ties."""
        return min(self.entries, key=lambda b: (self.entries[b], b))


@dataclass
class HhjConfig:
    m: int
    pilot_block: int
    K: float = 4.0
    boot_budget: int = 500
    stride: int = 1

    @classmethod
    def default(cls, n: int, c_m: float = 1.0, c_pilot: float = 1.0, **kw) -> "HhjConfig":
        """``m = ceil(c_m n^(1/2))``, pilot ``ceil(c_pilot n^(1/3))``."""
        return cls(m=math.ceil(c_m * n ** 0.5), pilot_block=math.ceil(c_pilot * n ** (1.0 / 3.0)), **kw)

    def validate(self, n: int) -> None:
        if not 2 <= self.m <= n:
            raise BlockLengthError(f"subsample length m={self.m} must lie in [2, n={n}]")
        if not 1 <= self.pilot_block < n:
            raise BlockLengthError(f"pilot block {self.pilot_block} must lie in [1, n)")
        if not self.K > 1:
            raise ValueError(f"K must exceed 1, got {self.K}")
        if self.stride < 1:
            raise ValueError("stride must be positive")
        if self.m ** (5.0 / 3.0) > n or self.m > self.pilot_block ** 2:
            warnings.warn(
                f"HHJ tuning m={self.m}, pilot={self.pilot_block} outside the asymptotic "
                f"guidance (m^(5/3) <= n, m <= pilot^2) for n={n}",
                stacklevel=3,
            )


def block_grid(m: int, K: float) -> list:
    """Integers ``b`` with ``m^(1/3)/K <= b <= K m^(1/3)``, kept inside ``[1, m-1]``."""
    if not K > 1:
        raise ValueError(f"K must exceed 1, got {K}")
    root = _icbrt(m)
    lo = max(1, math.ceil(root / K - 1e-12))
    hi = min(m - 1, math.floor(K * root + 1e-12))
    if lo > hi:
        raise BlockLengthError(f"empty block grid for m={m}, K={K}")
    return list(range(lo, hi + 1))


def _icbrt(m: float) -> float:
    # exact cube roots for perfect cubes (64 -> 4.0, not 3.9999999999999996)
    r = round(m ** (1.0 / 3.0))
    return float(r) if r ** 3 == m else m ** (1.0 / 3.0)


def _subsample_starts(n: int, m: int, stride: int) -> np.ndarray:
    return np.arange(0, n - m + 1, stride)


def subsample_mean_estimates(y: np.ndarray, m: int, b: int, starts: np.ndarray) -> np.ndarray:
    """Exact mean-statistic MBB estimates on every subsample, O(n) per ``b``."""
    c = m - b + 1  # blocks per subsample
    u = centred_block_means(y, b)
    cu = np.concatenate([[0.0], np.cumsum(u)])
    cu2 = np.concatenate([[0.0], np.cumsum(u * u)])
    s1 = (cu[starts + c] - cu[starts]) / c
    s2 = (cu2[starts + c] - cu2[starts]) / c
    return b * np.maximum(s2 - s1 * s1, 0.0)


def subsample_estimates(series, m: int, b: int, H: SmoothStatistic, budget: int, seed: SeedLike, stride: int = 1) -> np.ndarray:
    """MBB estimates with block ``b`` on each length-``m`` subsample."""
    x = as_series(series)
    n = x.shape[0]
    starts = _subsample_starts(n, m, stride)
    if H.is_mean:
        return subsample_mean_estimates(x[:, 0], m, b, starts)
    return np.array([
        mbb_variance_general(x[i:i + m], b, H, budget, seed_sequence(seed, "subsample", int(i), int(b))).value
        for i in starts
    ])


def subsample_mse_curve(series, m: int, grid, center: float, H: SmoothStatistic, budget: int = 500,
                        seed: SeedLike = 0, stride: int = 1, kind: str = "empirical") -> MseCurve:
    """Average of ``(sigma2_{i,m}(b) - center)^2`` over subsamples, for each ``b`` in ``grid``."""
    x = as_series(series)
    n = x.shape[0]
    if not 2 <= m <= n:
        raise BlockLengthError(f"subsample length m={m} must lie in [2, n={n}]")
    grid = list(grid)
    if not grid:
        raise BlockLengthError("empty block grid")
    bad = [b for b in grid if not 1 <= b < m]
    if bad:
        raise BlockLengthError(f"grid entries {bad} not in [1, m-1] for m={m}")
    entries = {}
    for b in grid:
        est = subsample_estimates(x, m, b, H, budget, seed, stride)
        entries[int(b)] = float(np.mean((est - center) ** 2))
    return MseCurve(entries, m, kind, meta={"center": center, "stride": stride})


def rescale_block(b_hat: int, n: int, m: int) -> float:
    """Scale a subsample-optimal block ``b_hat`` up to sample size ``n``."""
    return (n / m) ** (1.0 / 3.0) * b_hat


def _select(series, H: SmoothStatistic, config: HhjConfig, center: float, kind: str, seed: SeedLike, diag: dict) -> BlockSelection:
    x = as_series(series)
    n = x.shape[0]
    grid = block_grid(config.m, config.K)
    curve = subsample_mse_curve(x, config.m, grid, center, H, config.boot_budget, seed, config.stride, kind)
    b_hat = curve.argmin()
    raw = rescale_block(b_hat, n, config.m)
    diag.update({
        "b_hat": b_hat,
        "m": config.m,
        "K": config.K,
        "stride": config.stride,
        "curve": {str(b): v for b, v in curve.entries.items()},
    })
    method = "hhj" if kind == "empirical" else "hhj_oracle"
    return BlockSelection(method, finalize_block(raw, n), n, raw, diagnostics=diag)


def hhj_select(series, H: SmoothStatistic, config: HhjConfig, seed: SeedLike = 0) -> BlockSelection:
    """Subsampling selector centred at the full-sample pilot estimate."""
    x = as_series(series)
    config.validate(x.shape[0])
    pilot = mbb_variance(x, config.pilot_block, H, config.boot_budget, seed_sequence(seed, "pilot")).value
    return _select(x, H, config, pilot, "empirical", seed,
                   {"pilot_block": config.pilot_block, "pilot_value": pilot})


def hhj_oracle_select(series, H: SmoothStatistic, config: HhjConfig, sigma_inf_sq: float, seed: SeedLike = 0) -> BlockSelection:
    """Subsampling selector centred at the true long-run variance."""
    x = as_series(series)
    config.validate(x.shape[0])
    return _select(x, H, config, float(sigma_inf_sq), "oracle", seed, {"center": float(sigma_inf_sq)})
