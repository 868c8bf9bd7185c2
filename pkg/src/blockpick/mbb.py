"""Moving block bootstrap variance estimation.

The bootstrap series concatenates ``k = floor(n / l)`` blocks drawn
uniformly from the ``N = n - l + 1`` overlapping blocks, giving a resample
of length ``n1 = k * l``. The target is ``n1 * Var_*(H(resample mean))``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._rng import SeedLike, generator
from .exceptions import BlockLengthError
from .series import as_series, demean
from .statistic import SmoothStatistic


@dataclass(frozen=True)
class MbbEstimate:
    value: float
    block_length: int
    n_boot_samples: int = 0
    monte_carlo_se: Optional[float] = None


def _check_block(n: int, ell: int) -> None:
    if not 1 <= ell <= n - 1:
        raise BlockLengthError(f"block length must satisfy 1 <= l <= n-1 = {n - 1}, got {ell}")


def block_means(series, ell: int) -> np.ndarray:
    """All ``N = n - l + 1`` overlapping block means, shape ``(N, d)``.

    Uses prefix sums, so the cost is O(n) whatever ``l``.
    """
    x = as_series(series)
    n = x.shape[0]
    _check_block(n, ell)
    # centring keeps the prefix-sum differences well conditioned
    z = demean(x)
    centre = (x - z).mean(axis=0)
    csum = np.vstack([np.zeros((1, x.shape[1])), np.cumsum(z, axis=0)])
    return (csum[ell:] - csum[:-ell]) / ell + centre


def centred_block_means(y: np.ndarray, ell: int) -> np.ndarray:
    """Block means of the demeaned scalar series ``y`` (variance unchanged)."""
    cs = np.concatenate([[0.0], np.cumsum(demean(np.asarray(y, dtype=float)))])
    return (cs[ell:] - cs[:-ell]) / ell


def _population_variance(u: np.ndarray, axis=-1) -> np.ndarray:
    dev = u - u.mean(axis=axis, keepdims=True)
    return (dev * dev).mean(axis=axis)


def mbb_variance_mean_exact(series, ell: int) -> MbbEstimate:
    """Closed-form MBB variance for the sample mean (``d = 1``).

    The resample mean averages ``k`` i.i.d. uniform draws from the block
    means, so ``n1 Var_* = l * k * popvar(u) / k = l * popvar(u)``.
    """
    x = as_series(series)
    if x.shape[1] != 1:
        raise ValueError("the exact path needs a scalar series")
    _check_block(x.shape[0], ell)
    u = centred_block_means(x[:, 0], ell)
    return MbbEstimate(float(ell * _population_variance(u)), ell)


def _variance_and_se(theta: np.ndarray) -> tuple[float, float]:
    b = theta.shape[0]
    dev = theta - theta.mean()
    s2 = float(dev @ dev) / (b - 1)
    m4 = float(np.mean(dev ** 4))
    # large-sample variance of the sample variance
    var_s2 = max(m4 - s2 * s2 * (b - 3) / (b - 1), 0.0) / b
    return s2, float(np.sqrt(var_s2))


def resample_statistic(u: np.ndarray, n_blocks: int, H: SmoothStatistic, n_boot: int, rng: np.random.Generator) -> np.ndarray:
    """``n_boot`` bootstrap replicates of ``H`` given a block-mean collection ``u``."""
    idx = rng.integers(0, u.shape[0], size=(n_boot, n_blocks))
    return np.asarray(H.evaluate(u[idx].mean(axis=1)), dtype=float)


def mbb_variance_from_blocks(u: np.ndarray, ell: int, n: int, H: SmoothStatistic, n_boot: int, rng) -> MbbEstimate:
    k = n // ell
    theta = resample_statistic(u, k, H, n_boot, rng)
    s2, se = _variance_and_se(theta)
    n1 = ell * k
    return MbbEstimate(n1 * s2, ell, n_boot, n1 * se)


def mbb_variance_general(series, ell: int, H: SmoothStatistic, n_boot: int, seed: SeedLike) -> MbbEstimate:
    """Monte Carlo MBB variance for an arbitrary smooth statistic.

    Replicate variance uses divisor ``n_boot - 1``; ``monte_carlo_se`` comes
    from the replicate fourth central moment.
    """
    if n_boot < 2:
        raise ValueError(f"n_boot must be at least 2, got {n_boot}")
    x = as_series(series)
    if x.shape[1] != H.dim:
        raise ValueError(f"statistic {H.name!r} expects d={H.dim}, series has d={x.shape[1]}")
    u = block_means(x, ell)
    return mbb_variance_from_blocks(u, ell, x.shape[0], H, n_boot, generator(seed))


def mbb_variance(series, ell: int, H: SmoothStatistic, budget: int = 1000, seed: SeedLike = 0) -> MbbEstimate:
    """Exact path for the mean statistic, Monte Carlo with ``budget`` replicates otherwise."""
    if H.is_mean:
        return mbb_variance_mean_exact(series, ell)
    return mbb_variance_general(series, ell, H, budget, seed)


def mean_variance_curve(x: np.ndarray, ells) -> np.ndarray:
    """Exact mean-statistic estimates for several block lengths at once.

    ``x`` may be a single scalar series of shape ``(n,)`` or a batch
    ``(R, n)``; the result has shape ``(..., len(ells))``.
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    x = demean(x, axis=-1)
    csum = np.concatenate([np.zeros(x.shape[:-1] + (1,)), np.cumsum(x, axis=-1)], axis=-1)
    out = np.empty(x.shape[:-1] + (len(ells),))
    for j, ell in enumerate(ells):
        _check_block(n, ell)
        u = (csum[..., ell:] - csum[..., :-ell]) / ell
        out[..., j] = ell * _population_variance(u)
    return out
