"""Monte Carlo ground truth for the MSE-optimal block length.

The true curve ``MSE_n(l) = E[sigma2_n(l) - sigma_inf^2]^2`` is estimated by
brute force over ``R`` independent series. Replicate ``r`` always uses the
seed derived from ``(seed, r)``, and chunks are reduced in index order, so
results do not depend on the number of workers.
"""
from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._rng import seed_sequence
from .hhj import MseCurve, block_grid
from .mbb import mbb_variance_general, mean_variance_curve
from .processes import ProcessModel, generate, optimal_block_approx, theoretical_constants
from .statistic import SmoothStatistic, builtin_statistic

log = logging.getLogger(__name__)

CHUNK = 250


@dataclass
class OracleResult:
    mse_curve: MseCurve
    ell_opt: int
    ell0: float
    replications: int

    @property
    def mc_se_curve(self) -> dict:
        return self.mse_curve.se


def fn_curve(B0: float, V0: float, n: int, grid) -> MseCurve:
    """Leading-order MSE ``B0^2 / l^2 + V0 l / n`` on ``grid``."""
    if not V0 > 0:
        raise ValueError("V0 must be positive")
    grid = [int(b) for b in grid]
    if not grid or min(grid) < 1:
        raise ValueError("grid entries must be positive integers")
    return MseCurve({b: B0 * B0 / (b * b) + V0 * b / n for b in grid}, n, "analytic")


def optimal_block(curve: MseCurve) -> int:
    """Grid minimiser of ``curve``, smallest block length on ties."""
    return curve.argmin()


def _chunk_errors(model: ProcessModel, stat_name: str, n: int, grid: tuple, target: float,
                  budget: int, seed: int, lo: int, hi: int) -> np.ndarray:
    H = builtin_statistic(stat_name)
    draws = [generate(model, n, seed_sequence(seed, "replicate", r)) for r in range(lo, hi)]
    if H.is_mean:
        est = mean_variance_curve(np.stack([d[:, 0] for d in draws]), grid)
    else:
        est = np.array([
            [mbb_variance_general(d, ell, H, budget, seed_sequence(seed, "boot", r, ell)).value for ell in grid]
            for r, d in zip(range(lo, hi), draws)
        ])
    return (est - target) ** 2


def true_mse_curve(model: ProcessModel, H: SmoothStatistic, n: int, grid, R: int, target: float,
                   budget: int = 500, seed: int = 0, workers: int = 1) -> MseCurve:
    """Brute-force MSE of the MBB variance estimator around ``target`` on ``grid``."""
    if R < 2:
        raise ValueError("R must be at least 2")
    grid = tuple(int(b) for b in grid)
    bounds = [(lo, min(lo + CHUNK, R)) for lo in range(0, R, CHUNK)]
    args = (model, H.name, n, grid, float(target), budget, seed)
    if workers > 1 and len(bounds) > 1:
        with ProcessPoolExecutor(workers) as pool:
            parts = list(pool.map(_chunk_errors, *zip(*[args + b for b in bounds])))
    else:
        parts = [_chunk_errors(*args, lo, hi) for lo, hi in bounds]
    sq = np.concatenate(parts, axis=0)
    mse = sq.mean(axis=0)
    se = sq.std(axis=0, ddof=1) / np.sqrt(R)
    return MseCurve(
        {b: float(v) for b, v in zip(grid, mse)},
        n,
        "true_mc",
        se={b: float(s) for b, s in zip(grid, se)},
        meta={"R": R, "target": float(target), "seed": seed},
    )


def _cache_key(model: ProcessModel, H: SmoothStatistic, n: int, grid, R: int, seed: int, budget: int) -> dict:
    key = {"model": model.to_dict(), "statistic": H.name, "n": n, "grid": list(grid), "R": R, "seed": seed}
    if not H.is_mean:
        key["budget"] = budget
    return key


def cache_path(cache_dir, key: dict) -> Path:
    digest = hashlib.sha256(json.dumps(key, sort_keys=True).encode()).hexdigest()[:20]
    return Path(cache_dir) / f"oracle-{key['n']}-{digest}.json"


def write_json_atomic(path: Path, payload) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            json.dump(payload, fh, indent=1)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def oracle_to_json(key: dict, result: OracleResult) -> dict:
    curve = result.mse_curve
    return dict(
        key,
        curve=[[b, curve.entries[b], curve.se[b]] for b in curve.block_lengths],
        ell_opt=result.ell_opt,
        ell0=result.ell0,
    )


def oracle_from_json(payload: dict) -> OracleResult:
    entries = {int(b): float(v) for b, v, _ in payload["curve"]}
    se = {int(b): float(s) for b, _, s in payload["curve"]}
    curve = MseCurve(entries, payload["n"], "true_mc", se=se,
                     meta={"R": payload["R"], "seed": payload["seed"]})
    return OracleResult(curve, int(payload["ell_opt"]), float(payload["ell0"]), int(payload["R"]))


def compute_oracle(model: ProcessModel, H: SmoothStatistic, n: int, R: int = 5000, K: float = 4.0,
                   seed: int = 0, budget: int = 500, grid=None, cache_dir=None, workers: int = 1) -> OracleResult:
    """True MSE curve over the default grid ``J_n`` and its minimiser.

    With ``cache_dir`` set, results are read from / written to a JSON file
    keyed by (model, statistic, n, grid, R, seed).
    """
    constants = theoretical_constants(model, H)
    grid = list(grid) if grid is not None else block_grid(n, K)
    key = _cache_key(model, H, n, grid, R, seed, budget)
    path = cache_path(cache_dir, key) if cache_dir is not None else None
    if path is not None and path.exists():
        with path.open() as fh:
            payload = json.load(fh)
        log.debug("oracle cache hit %s", path)
        return oracle_from_json(payload)
    curve = true_mse_curve(model, H, n, grid, R, constants.sigma_inf_sq, budget, seed, workers)
    result = OracleResult(curve, optimal_block(curve), optimal_block_approx(constants, n), R)
    if path is not None:
        write_json_atomic(path, oracle_to_json(key, result))
    return result


def theorem1_residual(model: ProcessModel, H: SmoothStatistic, n: int, R: int, budget: int = 500,
                      seed: int = 0, K: float = 4.0, workers: int = 1) -> tuple[float, float]:
    """Max over ``J_n`` of ``|MSE_n(l) - 2 B0 sigma_inf^2 / n - f_n(l)|`` and ``l_opt / l0``."""
    c = theoretical_constants(model, H)
    res = compute_oracle(model, H, n, R, K, seed, budget, workers=workers)
    f = fn_curve(c.B0, c.V0, n, res.mse_curve.block_lengths)
    shift = 2.0 * c.B0 * c.sigma_inf_sq / n
    resid = max(abs(res.mse_curve.entries[b] - shift - f.entries[b]) for b in f.entries)
    return resid, res.ell_opt / res.ell0
