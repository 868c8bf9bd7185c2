"""Non-parametric plug-in (NPPI) block-length selection.

``V0`` is estimated by the jackknife-after-bootstrap (JAB) variance of the
MBB estimator at block ``l1``; ``B0`` by the doubling difference
``2 [sigma2(l2) - sigma2(2 l2)]`` scaled by ``l2``. Both go into
``(2 B0^2 / V0)^(1/3) n^(1/3)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._rng import SeedLike, generator, seed_sequence
from .exceptions import BlockLengthError, DegenerateEstimateError
from .mbb import block_means, centred_block_means, mbb_variance, mbb_variance_from_blocks
from .selection import BlockSelection, finalize_block, plug_in_block
from .series import as_series
from .statistic import SmoothStatistic


@dataclass
class NppiConfig:
    ell1: int
    ell2: int
    m_jab: int
    boot_budget: int = 500

    @classmethod
    def default(cls, n: int, c_ell: float = 1.0, c_mjab: float = 1.0, **kw) -> "NppiConfig":
        """``l1 = l2 = ceil(c_ell n^(1/7))`` and ``m = ceil(c_mjab n^(3/7))``."""
        ell = math.ceil(c_ell * n ** (1.0 / 7.0))
        return cls(ell1=ell, ell2=ell, m_jab=math.ceil(c_mjab * n ** (3.0 / 7.0)), **kw)

    def validate(self, n: int) -> None:
        if not 1 <= self.ell1 < n:
            raise BlockLengthError(f"ell1={self.ell1} must lie in [1, n)")
        if not 1 <= self.ell2 or 2 * self.ell2 > n - 1:
            raise BlockLengthError(f"2*ell2={2 * self.ell2} must not exceed n-1={n - 1}")
        _check_deletion(n - self.ell1 + 1, self.m_jab)


def _check_deletion(N: int, m: int) -> None:
    if not 1 <= m <= N - 2:
        raise BlockLengthError(f"JAB deletion size m={m} must lie in [1, N-2] with N={N}")


def pseudo_values(phi_hat: float, phi_deleted, N: int, m: int) -> np.ndarray:
    """Block-deleted jackknife pseudo-values ``(N phi_hat - (N - m) phi_i) / m``."""
    return (N * phi_hat - (N - m) * np.asarray(phi_deleted, dtype=float)) / m


def jab_from_values(phi_hat: float, phi_deleted, N: int, m: int) -> float:
    """``m / (N - m)`` times the mean squared deviation of the pseudo-values from ``phi_hat``."""
    # pseudo_i - phi_hat = (N - m)(phi_hat - phi_i) / m, exactly zero when phi_i == phi_hat
    dev = (N - m) / m * (phi_hat - np.asarray(phi_deleted, dtype=float))
    return float(m / (N - m) * np.mean(dev * dev))


def _deleted_mean_estimates(u: np.ndarray, ell: int, m: int) -> np.ndarray:
    """Exact mean-statistic estimates with blocks ``i..i+m-1`` removed, for every ``i``."""
    N = u.shape[0]
    keep = N - m
    c1 = np.concatenate([[0.0], np.cumsum(u)])
    c2 = np.concatenate([[0.0], np.cumsum(u * u)])
    starts = np.arange(N - m + 1)
    s1 = (c1[-1] - (c1[starts + m] - c1[starts])) / keep
    s2 = (c2[-1] - (c2[starts + m] - c2[starts])) / keep
    return ell * np.maximum(s2 - s1 * s1, 0.0)


def jab_variance(series, ell: int, m_jab: int, H: SmoothStatistic, boot_budget: int = 500, seed: SeedLike = 0) -> float:
    """JAB estimate of the variance of the MBB estimator at block length ``ell``.

    Block-deleted estimates resample ``floor(n/ell)`` blocks from the
    collection with blocks ``i..i+m_jab-1`` removed. The mean statistic is
    handled exactly; other statistics use fresh Monte Carlo resamples for
    every deletion.
    """
    x = as_series(series)
    n = x.shape[0]
    if not 1 <= ell <= n - 1:
        raise BlockLengthError(f"block length must satisfy 1 <= l <= n-1, got {ell}")
    N = n - ell + 1
    _check_deletion(N, m_jab)
    if H.is_mean:
        u = centred_block_means(x[:, 0], ell)
        dev = u - u.mean()
        phi_hat = float(ell * np.mean(dev * dev))
        phi_del = _deleted_mean_estimates(u, ell, m_jab)
    else:
        u = block_means(x, ell)
        phi_hat = mbb_variance_from_blocks(u, ell, n, H, boot_budget, generator(seed, "full")).value
        phi_del = np.array([
            mbb_variance_from_blocks(
                np.concatenate([u[:i], u[i + m_jab:]]), ell, n, H, boot_budget, generator(seed, "deleted", i)
            ).value
            for i in range(N - m_jab + 1)
        ])
    return jab_from_values(phi_hat, phi_del, N, m_jab)


def bias_hat(series, ell2: int, H: SmoothStatistic, boot_budget: int = 500, seed: SeedLike = 0) -> float:
    """``2 [sigma2(l2) - sigma2(2 l2)]``; estimates ``-B0 / l2``."""
    x = as_series(series)
    if 2 * ell2 > x.shape[0] - 1:
        raise BlockLengthError(f"2*ell2={2 * ell2} must not exceed n-1={x.shape[0] - 1}")
    short = mbb_variance(x, ell2, H, boot_budget, seed_sequence(seed, "bias", 1)).value
    long = mbb_variance(x, 2 * ell2, H, boot_budget, seed_sequence(seed, "bias", 2)).value
    return 2.0 * (short - long)


def nppi_select(series, H: SmoothStatistic, config: NppiConfig, seed: SeedLike = 0) -> BlockSelection:
    """Plug-in selector with JAB variance and doubling-difference bias estimates.

    Returns block length 1 flagged ``degenerate`` when the bias estimate
    vanishes; raises :class:`DegenerateEstimateError` when ``V0_hat <= 0``.
    """
    x = as_series(series)
    n = x.shape[0]
    config.validate(n)
    var_hat = jab_variance(x, config.ell1, config.m_jab, H, config.boot_budget, seed_sequence(seed, "jab"))
    b_hat = bias_hat(x, config.ell2, H, config.boot_budget, seed_sequence(seed, "bias"))
    B0 = config.ell2 * b_hat
    V0 = n / config.ell1 * var_hat
    diag = {
        "B0_hat": B0,
        "V0_hat": V0,
        "VAR_hat": var_hat,
        "BIAS_hat": b_hat,
        "ell1": config.ell1,
        "ell2": config.ell2,
        "m_jab": config.m_jab,
    }
    if B0 == 0.0:
        return BlockSelection("nppi", 1, n, 0.0, degenerate=True, diagnostics=diag)
    if not V0 > 0:
        raise DegenerateEstimateError(f"JAB variance estimate V0_hat={V0} is not positive; try a larger m_jab")
    raw = plug_in_block(B0, V0, n)
    return BlockSelection("nppi", finalize_block(raw, n), n, raw, diagnostics=diag)
