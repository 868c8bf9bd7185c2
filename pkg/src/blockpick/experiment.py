"""Convergence-rate experiments comparing the block-length selectors.

For every sample size in the grid, replicate series are drawn, every enabled
selector is run on the same draw, and the relative error against the Monte
Carlo optimum ``|l_hat - l_opt| / l_opt`` is recorded. Medians are regressed
on ``n`` in log-log scale to estimate each method's rate exponent.
"""
from __future__ import annotations

import csv
import json
import logging
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from ._rng import seed_sequence
from .exceptions import BlockpickError, ConfigError, DegenerateEstimateError, ExperimentAborted, ModelError
from .hhj import HhjConfig, hhj_oracle_select, hhj_select
from .nppi import NppiConfig, nppi_select
from .oracle import compute_oracle, write_json_atomic
from .processes import ProcessModel, generate, theoretical_constants
from .pw import PwConfig, pw_select
from .statistic import STATISTIC_NAMES, builtin_statistic

log = logging.getLogger(__name__)

METHODS = ("hhj", "hhj_oracle", "nppi", "pw")
THEORETICAL_SLOPES = {"hhj": -1.0 / 6.0, "hhj_oracle": -1.0 / 6.0, "nppi": -2.0 / 7.0, "pw": -1.0 / 3.0}
MAX_DEGENERATE_FRACTION = 0.2
CSV_COLUMNS = ("method", "n", "median_rel_err", "q25", "q75", "reps")

# JSON Schema (draft 2020-12) for reports written by ``emit_report(..., "json")``
REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["methods", "ell_opt", "config"],
    "properties": {
        "methods": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "required": ["points", "fitted_slope", "slope_se", "theoretical_slope", "note"],
                "properties": {
                    "points": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["n", "median", "q25", "q75", "reps", "degenerate"],
                            "properties": {
                                "n": {"type": "integer", "minimum": 1},
                                "median": {"type": "number", "minimum": 0},
                                "q25": {"type": "number", "minimum": 0},
                                "q75": {"type": "number", "minimum": 0},
                                "reps": {"type": "integer", "minimum": 0},
                                "degenerate": {"type": "integer", "minimum": 0},
                            },
                        },
                    },
                    "fitted_slope": {"type": ["number", "null"]},
                    "slope_se": {"type": ["number", "null"]},
                    "theoretical_slope": {"type": ["number", "null"]},
                    "note": {"type": "string"},
                },
            },
        },
        "ell_opt": {"type": "object", "additionalProperties": {"type": "integer", "minimum": 1}},
        "config": {"type": "object"},
    },
}

_TUNING_KEYS = {
    "hhj": {"c_m", "c_pilot", "m", "pilot", "K", "stride", "boot_budget"},
    "nppi": {"c_ell", "c_mjab", "ell1", "ell2", "m_jab", "boot_budget"},
    "pw": {"M", "tau"},
}


@dataclass
class ExperimentConfig:
    model: ProcessModel
    statistic: str = "mean"
    methods: tuple = ("hhj", "nppi", "pw")
    n_grid: tuple = (500, 1000, 2000, 4000)
    replications: int = 300
    tuning: dict = field(default_factory=dict)
    master_seed: int = 0
    parallelism: int = 1
    oracle_R: int = 5000
    oracle_K: float = 4.0
    oracle_seed: Optional[int] = None
    cache_dir: Optional[str] = None

    def hhj_config(self, n: int) -> HhjConfig:
        t = dict(self.tuning.get("hhj", {}))
        base = HhjConfig.default(n, t.pop("c_m", 1.0), t.pop("c_pilot", 1.0))
        return HhjConfig(
            m=t.get("m", base.m),
            pilot_block=t.get("pilot", base.pilot_block),
            K=t.get("K", 4.0),
            boot_budget=t.get("boot_budget", 500),
            stride=t.get("stride", 1),
        )

    def nppi_config(self, n: int) -> NppiConfig:
        t = dict(self.tuning.get("nppi", {}))
        base = NppiConfig.default(n, t.pop("c_ell", 1.0), t.pop("c_mjab", 1.0))
        return NppiConfig(
            ell1=t.get("ell1", base.ell1),
            ell2=t.get("ell2", base.ell2),
            m_jab=t.get("m_jab", base.m_jab),
            boot_budget=t.get("boot_budget", 500),
        )

    def pw_config(self, n: int) -> PwConfig:
        t = self.tuning.get("pw", {})
        return PwConfig(M=t.get("M"), tau=t.get("tau", 0.2))

    def resolved_tuning(self, n: int) -> dict:
        """Per-method tuning actually used at sample size ``n``."""
        out = {}
        if "hhj" in self.methods or "hhj_oracle" in self.methods:
            out["hhj"] = asdict(self.hhj_config(n))
        if "nppi" in self.methods:
            out["nppi"] = asdict(self.nppi_config(n))
        if "pw" in self.methods:
            out["pw"] = {"M": self.pw_config(n).bandwidth(n)}
        return out

    def to_dict(self) -> dict:
        d = asdict(self)
        d["model"] = self.model.to_dict()
        d["methods"] = list(self.methods)
        d["n_grid"] = list(self.n_grid)
        return d


def _require(raw: dict, key: str, kind, where: str = ""):
    if key not in raw:
        raise ConfigError(f"missing required field '{where}{key}'")
    value = raw[key]
    if not isinstance(value, kind) or (isinstance(value, bool) and kind is not bool):
        raise ConfigError(f"field '{where}{key}' has wrong type {type(value).__name__}")
    return value


def _positive_int(value, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise ConfigError(f"field '{name}' must be a positive integer, got {value!r}")
    return value


def config_from_dict(raw: dict) -> ExperimentConfig:
    """Validate a parsed config mapping and fill defaults."""
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    known = {"model", "statistic", "methods", "n_grid", "replications", "tuning", "master_seed",
             "parallelism", "oracle"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config fields: {sorted(unknown)}")
    try:
        model = ProcessModel.from_dict(_require(raw, "model", dict))
    except (ModelError, TypeError) as exc:
        raise ConfigError(f"field 'model': {exc}") from None

    statistic = raw.get("statistic", "mean")
    if statistic not in STATISTIC_NAMES:
        raise ConfigError(f"field 'statistic' must be one of {STATISTIC_NAMES}, got {statistic!r}")
    if builtin_statistic(statistic).dim != model.dim:
        raise ConfigError(f"statistic {statistic!r} needs a model with dim={builtin_statistic(statistic).dim}")

    methods = _require(raw, "methods", list)
    if not methods or any(m not in METHODS for m in methods) or len(set(methods)) != len(methods):
        raise ConfigError(f"field 'methods' must be a non-empty subset of {METHODS}, got {methods!r}")

    n_grid = _require(raw, "n_grid", list)
    if not n_grid:
        raise ConfigError("field 'n_grid' must be non-empty")
    for i, n in enumerate(n_grid):
        _positive_int(n, f"n_grid[{i}]")
    if any(b <= a for a, b in zip(n_grid, n_grid[1:])):
        raise ConfigError(f"field 'n_grid' must be strictly ascending, got {n_grid}")

    replications = _positive_int(_require(raw, "replications", int), "replications")
    if replications < 10:
        raise ConfigError(f"field 'replications' must be at least 10, got {replications}")

    tuning = raw.get("tuning", {})
    if not isinstance(tuning, dict):
        raise ConfigError("field 'tuning' must be an object")
    for method, params in tuning.items():
        if method not in _TUNING_KEYS:
            raise ConfigError(f"field 'tuning.{method}': unknown method")
        if not isinstance(params, dict):
            raise ConfigError(f"field 'tuning.{method}' must be an object")
        bad = set(params) - _TUNING_KEYS[method]
        if bad:
            raise ConfigError(f"field 'tuning.{method}': unknown keys {sorted(bad)}")

    master_seed = raw.get("master_seed", 0)
    if isinstance(master_seed, bool) or not isinstance(master_seed, int) or not 0 <= master_seed < 2 ** 64:
        raise ConfigError("field 'master_seed' must be an unsigned 64-bit integer")
    parallelism = _positive_int(raw.get("parallelism", 1), "parallelism")

    oracle = raw.get("oracle", {})
    if not isinstance(oracle, dict):
        raise ConfigError("field 'oracle' must be an object")
    bad = set(oracle) - {"R", "K", "seed", "cache_dir"}
    if bad:
        raise ConfigError(f"field 'oracle': unknown keys {sorted(bad)}")

    cfg = ExperimentConfig(
        model=model,
        statistic=statistic,
        methods=tuple(methods),
        n_grid=tuple(n_grid),
        replications=replications,
        tuning={k: dict(v) for k, v in tuning.items()},
        master_seed=master_seed,
        parallelism=parallelism,
        oracle_R=_positive_int(oracle.get("R", 5000), "oracle.R"),
        oracle_K=float(oracle.get("K", 4.0)),
        oracle_seed=oracle.get("seed"),
        cache_dir=oracle.get("cache_dir"),
    )
    _check_semantics(cfg)
    return cfg


def _check_semantics(cfg: ExperimentConfig) -> None:
    try:
        theoretical_constants(cfg.model, builtin_statistic(cfg.statistic))
    except BlockpickError as exc:
        raise ConfigError(f"field 'model': no usable ground truth ({exc})") from None
    for n in cfg.n_grid:
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                if "hhj" in cfg.methods or "hhj_oracle" in cfg.methods:
                    cfg.hhj_config(n).validate(n)
            if "nppi" in cfg.methods:
                cfg.nppi_config(n).validate(n)
            if "pw" in cfg.methods:
                cfg.pw_config(n).validate(n)
        except (BlockpickError, ValueError) as exc:
            raise ConfigError(f"field 'tuning' invalid at n={n}: {exc}") from None


def load_config(path) -> ExperimentConfig:
    """Read and validate a JSON experiment config."""
    text = Path(path).read_text()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return config_from_dict(raw)


# -- running ---------------------------------------------------------------

@dataclass
class RatePoint:
    n: int
    median: float
    q25: float
    q75: float
    reps: int
    degenerate: int = 0


@dataclass
class MethodRate:
    points: list
    fitted_slope: float
    slope_se: float
    theoretical_slope: float
    note: str = ""


@dataclass
class RateReport:
    methods: dict
    ell_opt: dict
    errors: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "methods": {
                name: {
                    "points": [asdict(p) for p in rate.points],
                    "fitted_slope": _json_float(rate.fitted_slope),
                    "slope_se": _json_float(rate.slope_se),
                    "theoretical_slope": _json_float(rate.theoretical_slope),
                    "note": rate.note,
                }
                for name, rate in self.methods.items()
            },
            "ell_opt": {str(n): v for n, v in self.ell_opt.items()},
            "config": self.config,
        }


def _json_float(x: float):
    return None if not math.isfinite(x) else x


def fit_rate(points) -> tuple[float, float]:
    """OLS slope of ``log(median_error)`` on ``log(n)`` and its standard error."""
    points = list(points)
    if len(points) < 3:
        raise ValueError(f"need at least 3 points to fit a rate, got {len(points)}")
    n = np.array([p[0] for p in points], dtype=float)
    e = np.array([p[1] for p in points], dtype=float)
    if np.any(e <= 0):
        raise ValueError("median errors must be positive for a log-log fit")
    x, y = np.log(n), np.log(e)
    xc = x - x.mean()
    sxx = float(xc @ xc)
    slope = float(xc @ (y - y.mean())) / sxx
    resid = y - y.mean() - slope * xc
    dof = len(points) - 2
    se = math.sqrt(float(resid @ resid) / dof / sxx) if dof > 0 else 0.0
    return slope, se


def _select_one(method: str, x: np.ndarray, cfg: ExperimentConfig, n: int, sigma_inf_sq: float, seed):
    H = builtin_statistic(cfg.statistic)
    if method == "hhj":
        return hhj_select(x, H, cfg.hhj_config(n), seed)
    if method == "hhj_oracle":
        return hhj_oracle_select(x, H, cfg.hhj_config(n), sigma_inf_sq, seed)
    if method == "nppi":
        return nppi_select(x, H, cfg.nppi_config(n), seed)
    if method == "pw":
        return pw_select(x, H, cfg.pw_config(n))
    raise ValueError(f"unknown method {method!r}")


def _run_replicates(cfg: ExperimentConfig, n: int, sigma_inf_sq: float, reps: range, extra: Optional[dict]) -> list:
    """Selector outputs for replicates ``reps``; entries are ``(block_length | None, degenerate)``."""
    out = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for r in reps:
            x = generate(cfg.model, n, seed_sequence(cfg.master_seed, n, r, "data"))
            row = {}
            for method in cfg.methods:
                seed = seed_sequence(cfg.master_seed, n, r, method)
                try:
                    sel = _select_one(method, x, cfg, n, sigma_inf_sq, seed)
                    row[method] = (sel.block_length, sel.degenerate)
                except DegenerateEstimateError:
                    row[method] = (None, True)
            for name, fn in (extra or {}).items():
                row[name] = (int(fn(x, n)), False)
            out.append(row)
    return out


def _chunks(R: int, parts: int) -> list:
    size = max(1, math.ceil(R / parts))
    return [range(lo, min(lo + size, R)) for lo in range(0, R, size)]


def oracle_for(cfg: ExperimentConfig, n: int):
    H = builtin_statistic(cfg.statistic)
    seed = cfg.oracle_seed if cfg.oracle_seed is not None else cfg.master_seed
    return compute_oracle(cfg.model, H, n, cfg.oracle_R, cfg.oracle_K, seed,
                          cache_dir=cfg.cache_dir, workers=cfg.parallelism)


def run_experiment(cfg: ExperimentConfig, extra_selectors: Optional[dict[str, Callable]] = None,
                   ell_opt: Optional[dict] = None) -> RateReport:
    """Run every selector on paired replicate draws and fit rate exponents.

    ``extra_selectors`` maps a name to ``f(series, n) -> block length`` and is
    meant for diagnostics (single process only). ``ell_opt`` overrides the
    oracle optimum per ``n``.

    Raises
    ------
    ExperimentAborted
        When more than 20% of a selector's replicates are degenerate at some ``n``.
    """
    H = builtin_statistic(cfg.statistic)
    sigma_inf_sq = theoretical_constants(cfg.model, H).sigma_inf_sq
    names = list(cfg.methods) + list(extra_selectors or {})
    errors = {name: {} for name in names}
    points = {name: [] for name in names}
    optima = {}
    pool = ProcessPoolExecutor(cfg.parallelism) if cfg.parallelism > 1 and not extra_selectors else None
    try:
        for n in cfg.n_grid:
            optima[n] = int(ell_opt[n]) if ell_opt and n in ell_opt else oracle_for(cfg, n).ell_opt
            chunks = _chunks(cfg.replications, cfg.parallelism * 4 if pool else 1)
            if pool:
                futures = [pool.submit(_run_replicates, cfg, n, sigma_inf_sq, c, None) for c in chunks]
                rows = [row for f in futures for row in f.result()]
            else:
                rows = [row for c in chunks for row in _run_replicates(cfg, n, sigma_inf_sq, c, extra_selectors)]
            for name in names:
                picks = [row[name] for row in rows]
                n_degenerate = sum(1 for _, deg in picks if deg)
                if n_degenerate > MAX_DEGENERATE_FRACTION * len(picks):
                    raise ExperimentAborted(
                        f"{name}: {n_degenerate}/{len(picks)} degenerate selections at n={n}; "
                        "tuning is likely invalid"
                    )
                rel = [abs(b - optima[n]) / optima[n] for b, _ in picks if b is not None]
                errors[name][n] = rel
                q25, med, q75 = np.percentile(rel, [25, 50, 75])
                points[name].append(RatePoint(n, float(med), float(q25), float(q75), len(rel), n_degenerate))
                log.info("n=%d %s median rel err %.4f", n, name, med)
    finally:
        if pool:
            pool.shutdown()

    methods = {}
    for name in names:
        pts = points[name]
        slope, se, note = math.nan, math.nan, ""
        if len(pts) < 3:
            note = "insufficient grid"
        elif all(p.median == 0 for p in pts):
            note = "degenerate zero errors"
        elif any(p.median == 0 for p in pts):
            note = "zero median at some n"
        else:
            slope, se = fit_rate([(p.n, p.median) for p in pts])
        methods[name] = MethodRate(pts, slope, se, THEORETICAL_SLOPES.get(name, math.nan), note)
    return RateReport(methods, optima, errors, cfg.to_dict())


# -- reporting -------------------------------------------------------------

def report_rows(report: RateReport) -> list:
    return [
        (name, p.n, p.median, p.q25, p.q75, p.reps)
        for name, rate in report.methods.items()
        for p in rate.points
    ]


def emit_report(report: RateReport, fmt: str, path) -> Path:
    """Write ``report`` as ``csv``, ``json`` or a ``gnuplot`` script."""
    path = Path(path)
    if fmt == "csv":
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_COLUMNS)
            for name, n, med, q25, q75, reps in report_rows(report):
                w.writerow([name, n, repr(med), repr(q25), repr(q75), reps])
    elif fmt == "json":
        write_json_atomic(path, report.to_dict())
    elif fmt == "gnuplot":
        path.write_text(_gnuplot_script(report, path))
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    return path


def _gnuplot_script(report: RateReport, path: Path) -> str:
    lines = [
        "# log-log median relative error against n",
        "set terminal pngcairo size 900,650",
        f"set output '{path.with_suffix('.png').name}'",
        "set logscale xy",
        "set xlabel 'n'",
        "set ylabel 'median |l_hat - l_opt| / l_opt'",
        "set key outside right",
    ]
    names = list(report.methods)
    for name in names:
        lines.append(f"${name} << EOD")
        lines += [f"{p.n} {p.median!r} {p.q25!r} {p.q75!r}" for p in report.methods[name].points]
        lines.append("EOD")
    ns = [p.n for rate in report.methods.values() for p in rate.points]
    meds = [p.median for rate in report.methods.values() for p in rate.points if p.median > 0]
    n0 = min(ns) if ns else 1
    e0 = max(meds) if meds else 1.0
    plots = [f"${name} using 1:2 with linespoints title '{name}'" for name in names]
    for label, s in (("-1/6", -1.0 / 6.0), ("-2/7", -2.0 / 7.0), ("-1/3", -1.0 / 3.0)):
        plots.append(f"{e0!r}*(x/{n0})**({s!r}) with lines dashtype 2 title 'slope {label}'")
    lines.append("plot " + ", \\\n     ".join(plots))
    return "\n".join(lines) + "\n"


def read_csv_report(path) -> list:
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        return [
            (row["method"], int(row["n"]), float(row["median_rel_err"]), float(row["q25"]),
             float(row["q75"]), int(row["reps"]))
            for row in reader
        ]
