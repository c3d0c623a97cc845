"""Monte Carlo experiments: MISE tables, aggregation curves, band studies
and plot-ready curve files.

Every random draw is keyed by ``(seed, model, n, replicate, purpose[, b])``
so output is identical for any thread count or execution order.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
import configparser
import csv
from dataclasses import dataclass, field, fields
import io
import logging
import math
import os
from pathlib import Path

import numpy as np

from bagdens.bagging import fit_bagged, fit_rash
from bagdens.bands import bootstrap_band_from_members, hist_band, kde_band
from bagdens.bandwidth import BandwidthRule, select_bandwidth
from bagdens.errors import BagDensError, ConfigError
from bagdens.estimators import KERNELS, evaluate_grid, fit
from bagdens.metrics import EVALUATIONS, EvalGrid, coverage, ise, mean_width, summarize
from bagdens.models import MODELS, get_model
from bagdens.rng import RngStream

log = logging.getLogger(__name__)

EXPERIMENTS = ("mise", "agg-curve", "bands", "curves")
ESTIMATORS = ("hist", "fp", "kde", "baghist", "bagfp", "bagkde", "rash")
BANDS = ("boot-hist", "boot-fp", "boot-kde", "kde-sm", "hist-sm")
MEMBER_RULES = ("mixed", "lscv", "reference")
DEFAULT_N = (50, 100, 200, 500, 1000)
DEFAULT_AGG_B = (1, 2, 5, 10, 20, 50, 100, 200)
KDE_SM_MULTIPLIER = 2.0   # about two standard errors on the square-root scale
CSV_HEADER = ("experiment", "model", "estimator", "n", "B", "statistic", "value", "stderr", "seed")

# stream purposes under (seed, model, n, replicate)
_SAMPLE, _BOOT, _RASH = 0, 1, 2


class NumericalError(BagDensError):
    pass


@dataclass
class ExperimentConfig:
    experiment: str = "mise"
    seed: int | None = None
    models: tuple[str, ...] = tuple(MODELS)
    estimators: tuple[str, ...] = ESTIMATORS
    n: tuple[int, ...] = DEFAULT_N
    replicates: int = 100
    ensemble: tuple[int, ...] = (200,)
    alpha: float = 0.05
    kernel: str = "gaussian"
    bandwidth: str = "lscv"
    member_bandwidth: str = "mixed"
    evaluation: str = "weighted"
    grid_points: int = 1001
    bands: tuple[str, ...] = ("boot-hist", "boot-fp", "boot-kde", "kde-sm")
    threads: int = field(default_factory=lambda: os.cpu_count() or 1)
    out: str | None = None

    def validate(self) -> "ExperimentConfig":
        def bad(msg):
            raise ConfigError(msg)

        if self.experiment not in EXPERIMENTS:
            bad(f"unknown experiment {self.experiment!r}")
        if self.seed is None:
            bad("an explicit seed is required (--seed or 'seed = ...' in the config)")
        if not 0 <= int(self.seed) < 2 ** 64:
            bad("seed must be an unsigned 64-bit integer")
        for m in self.models:
            if m not in MODELS:
                bad(f"unknown model {m!r}; choose from {', '.join(MODELS)}")
        for e in self.estimators:
            if e not in ESTIMATORS:
                bad(f"unknown estimator {e!r}; choose from {', '.join(ESTIMATORS)}")
        for b in self.bands:
            if b not in BANDS:
                bad(f"unknown band {b!r}; choose from {', '.join(BANDS)}")
        if not self.models or not self.n or not self.ensemble:
            bad("models, n and ensemble must not be empty")
        if any(v < 2 for v in self.n):
            bad("sample sizes must be >= 2")
        if self.replicates < 1 or any(b < 1 for b in self.ensemble) or self.threads < 1:
            bad("replicates, ensemble sizes and threads must be positive")
        if self.grid_points < 2:
            bad("grid_points must be >= 2")
        if not 0 < self.alpha < 1:
            bad("alpha must lie in (0, 1)")
        if self.kernel not in KERNELS:
            bad(f"unknown kernel {self.kernel!r}")
        if self.bandwidth not in ("lscv", "reference"):
            bad("bandwidth must be 'lscv' or 'reference'")
        if self.member_bandwidth not in MEMBER_RULES:
            bad(f"member_bandwidth must be one of {MEMBER_RULES}")
        if self.evaluation not in EVALUATIONS:
            bad(f"evaluation must be one of {EVALUATIONS}")
        if self.experiment == "bands" and max(self.ensemble) < 2:
            bad("bootstrap bands need B >= 2")
        if self.experiment == "curves" and (len(self.models) != 1 or len(self.n) != 1):
            bad("curves needs exactly one model and one sample size")
        return self

    # -- bandwidth rules ---------------------------------------------------

    def base_rule(self) -> BandwidthRule:
        return BandwidthRule(self.bandwidth)

    def member_rule(self, kind: str) -> BandwidthRule:
        if self.member_bandwidth == "mixed":
            # LSCV collapses on tied resamples for polygons; use the reference rule
            return BandwidthRule("reference") if kind == "fp" else self.base_rule()
        return BandwidthRule(self.member_bandwidth)


# -- config file / overrides ---------------------------------------------------

_LIST_INT = ("n", "ensemble")
_LIST_STR = ("models", "estimators", "bands")
_INT = ("seed", "replicates", "threads", "grid_points")
_FLOAT = ("alpha",)


def _split(value) -> list[str]:
    if isinstance(value, (list, tuple)):
        return [str(v).strip() for v in value]
    return [v.strip() for v in str(value).replace(";", ",").split(",") if v.strip()]


def coerce(key: str, value):
    key = key.replace("-", "_")
    try:
        if key in _LIST_INT:
            return tuple(int(v) for v in _split(value))
        if key in _LIST_STR:
            return tuple(v.lower() for v in _split(value))
        if key in _INT:
            return int(value)
        if key in _FLOAT:
            return float(value)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {value!r}") from exc
    return str(value).strip()


def read_config_file(path) -> dict:
    """Parse ``key = value`` lines (``#`` comments) into typed overrides."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    parser = configparser.ConfigParser(comment_prefixes=("#",), inline_comment_prefixes=("#",),
                                       interpolation=None)
    try:
        parser.read_string("[experiment]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    known = {f.name for f in fields(ExperimentConfig)}
    out = {}
    for key, value in parser["experiment"].items():
        k = key.replace("-", "_")
        if k not in known:
            raise ConfigError(f"unknown config key {key!r}")
        out[k] = coerce(k, value)
    return out


def build_config(experiment: str, file_values: dict | None = None, **overrides
                 ) -> ExperimentConfig:
    values = dict(file_values or {})
    values.update({k: coerce(k, v) for k, v in overrides.items() if v is not None})
    values["experiment"] = experiment
    if experiment == "agg-curve":
        values.setdefault("ensemble", DEFAULT_AGG_B)
        values.setdefault("n", (500,))
        values.setdefault("estimators", ("baghist", "bagfp", "bagkde"))
    elif experiment == "bands":
        values.setdefault("n", (500,))
    elif experiment == "curves":
        values.setdefault("models", ("normal",))
        values.setdefault("n", (500,))
        values.setdefault("estimators", ())
        values.setdefault("bands", ())
    try:
        cfg = ExperimentConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg.validate()


# -- results -------------------------------------------------------------------

@dataclass(frozen=True)
class Row:
    experiment: str
    model: str
    estimator: str
    n: int
    B: int
    statistic: str
    value: float
    stderr: float
    seed: int


def fmt(v: float) -> str:
    if not math.isfinite(v):
        raise NumericalError(f"non-finite statistic {v}")
    return f"{v:.10g}"


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow((r.experiment, r.model, r.estimator, r.n, r.B, r.statistic,
                    fmt(r.value), fmt(r.stderr), r.seed))
    return buf.getvalue()


def write_output(text: str, out: str | None) -> None:
    if out is None or out == "-":
        print(text, end="")
        return
    Path(out).parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="\n") as fh:
        fh.write(text)


# -- per-replicate fitting -----------------------------------------------------

_BAGGED = {"baghist": "hist", "bagfp": "fp", "bagkde": "kde"}


@dataclass
class Replicate:
    cfg: ExperimentConfig
    model: object
    n: int
    m: int
    grid: np.ndarray

    @property
    def root(self) -> RngStream:
        return RngStream(self.cfg.seed, self.model.index, self.n, self.m)

    def sample(self) -> np.ndarray:
        return self.model.sample(self.n, self.root.child(_SAMPLE))

    def base(self, x, kind):
        h = select_bandwidth(x, kind, self.cfg.base_rule(), self.cfg.kernel)
        return fit(kind, x, h, kernel=self.cfg.kernel)

    def members(self, x, kind, B) -> np.ndarray:
        ens = fit_bagged(x, kind, B, self.cfg.member_rule(kind), self.cfg.kernel,
                         self.root.child(_BOOT))
        return ens.member_grid_values(self.grid)

    def point_values(self, x, est_id, B) -> np.ndarray:
        """Grid values of a point estimate, or the (B, N) member matrix."""
        if est_id in ("hist", "fp", "kde"):
            return evaluate_grid(self.base(x, est_id), self.grid)
        if est_id in _BAGGED:
            return self.members(x, _BAGGED[est_id], B)
        h = select_bandwidth(x, "hist", self.cfg.base_rule())
        return fit_rash(x, h, B, self.root.child(_RASH)).member_grid_values(self.grid)


def _run_replicates(cfg: ExperimentConfig, fn, count: int) -> list:
    if cfg.threads == 1:
        return [fn(m) for m in range(count)]
    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        return list(pool.map(fn, range(count)))


def _is_ensemble(est_id: str) -> bool:
    return est_id in _BAGGED or est_id == "rash"


def _check(values: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(values)):
        raise NumericalError("non-finite density values")
    return values


# -- experiments ---------------------------------------------------------------

def run_mise(cfg: ExperimentConfig) -> list[Row]:
    B = max(cfg.ensemble)
    rows = []
    for model_id in cfg.models:
        model = get_model(model_id)
        grid = EvalGrid.for_model(model, cfg.grid_points)
        w = grid.weights(model, cfg.evaluation)
        for n in cfg.n:
            def one(m, model=model, n=n, grid=grid, w=w):
                rep = Replicate(cfg, model, n, m, grid.points)
                x = rep.sample()
                out = []
                for est in cfg.estimators:
                    v = _check(rep.point_values(x, est, B))
                    if v.ndim == 2:
                        v = v.mean(axis=0)
                    out.append(float(ise(v, model, grid, w)))
                return out

            log.info("mise %s n=%d", model_id, n)
            per_rep = np.array(_run_replicates(cfg, one, cfg.replicates))
            for j, est in enumerate(cfg.estimators):
                s = summarize(per_rep[:, j])
                rows.append(Row("mise", model_id, est, n, B if _is_ensemble(est) else 0,
                                "mise100", 100 * s.mean, 100 * s.stderr, cfg.seed))
    return rows


def run_agg_curve(cfg: ExperimentConfig) -> list[Row]:
    """MISE as a function of B, from nested prefixes of one B_max ensemble."""
    b_list = sorted(set(cfg.ensemble))
    b_max = b_list[-1]
    estimators = [e for e in cfg.estimators if _is_ensemble(e)]
    if not estimators:
        raise ConfigError("agg-curve needs at least one bagged estimator or rash")
    rows = []
    for model_id in cfg.models:
        model = get_model(model_id)
        grid = EvalGrid.for_model(model, cfg.grid_points)
        w = grid.weights(model, cfg.evaluation)
        for n in cfg.n:
            def one(m, model=model, n=n, grid=grid, w=w):
                rep = Replicate(cfg, model, n, m, grid.points)
                x = rep.sample()
                out = []
                for est in estimators:
                    members = _check(rep.point_values(x, est, b_max))
                    csum = np.cumsum(members, axis=0)
                    prefix = np.stack([csum[b - 1] / b for b in b_list])
                    out.append(ise(prefix, model, grid, w))
                return out

            log.info("agg-curve %s n=%d", model_id, n)
            per_rep = np.array(_run_replicates(cfg, one, cfg.replicates))
            for j, est in enumerate(estimators):
                for k, b in enumerate(b_list):
                    s = summarize(per_rep[:, j, k])
                    rows.append(Row("agg-curve", model_id, est, n, b, "mise100",
                                    100 * s.mean, 100 * s.stderr, cfg.seed))
    return rows


def make_band(rep: Replicate, x, band_id: str, B: int, members_cache: dict):
    cfg, grid = rep.cfg, rep.grid
    if band_id.startswith("boot-"):
        kind = band_id[5:]
        if kind not in members_cache:
            members_cache[kind] = _check(rep.members(x, kind, B))
        return bootstrap_band_from_members(members_cache[kind], cfg.alpha, grid)
    if band_id == "kde-sm":
        return kde_band(rep.base(x, "kde"), KDE_SM_MULTIPLIER, grid)
    return hist_band(rep.base(x, "hist"), cfg.alpha, grid)


def run_bands(cfg: ExperimentConfig, band_factory=None) -> list[Row]:
    """Mean weighted coverage (x100) and mean width for each band construction.

    ``band_factory(rep, x, band_id)`` replaces the band constructions (used
    to plug stub bands into the pipeline).
    """
    B = max(cfg.ensemble)
    rows = []
    for model_id in cfg.models:
        model = get_model(model_id)
        grid = EvalGrid.for_model(model, cfg.grid_points)
        w = grid.weights(model, cfg.evaluation)
        f = model.pdf(grid.points)
        for n in cfg.n:
            def one(m, model=model, n=n, grid=grid, w=w, f=f):
                rep = Replicate(cfg, model, n, m, grid.points)
                x = rep.sample()
                cache: dict = {}
                out = []
                for band_id in cfg.bands:
                    if band_factory is None:
                        band = make_band(rep, x, band_id, B, cache)
                    else:
                        band = band_factory(rep, x, band_id)
                    out.append((coverage(band, f, w), mean_width(band, w)))
                return out

            log.info("bands %s n=%d", model_id, n)
            per_rep = np.array(_run_replicates(cfg, one, cfg.replicates))
            for j, band_id in enumerate(cfg.bands):
                b = B if band_id.startswith("boot-") else 0
                cov = summarize(per_rep[:, j, 0])
                wid = summarize(per_rep[:, j, 1])
                rows.append(Row("bands", model_id, band_id, n, b, "coverage100",
                                100 * cov.mean, 100 * cov.stderr, cfg.seed))
                rows.append(Row("bands", model_id, band_id, n, b, "width",
                                wid.mean, wid.stderr, cfg.seed))
    return rows


def run_curves(cfg: ExperimentConfig) -> str:
    """One replicate on the evaluation grid: truth, estimates and bands."""
    model = get_model(cfg.models[0])
    n = cfg.n[0]
    B = max(cfg.ensemble)
    grid = EvalGrid.for_model(model, cfg.grid_points).points
    rep = Replicate(cfg, model, n, 0, grid)
    x = rep.sample()
    columns = {"t": grid, "f_true": model.pdf(grid)}
    for est in cfg.estimators:
        v = _check(rep.point_values(x, est, B))
        columns[est] = v.mean(axis=0) if v.ndim == 2 else v
    cache: dict = {}
    for band_id in cfg.bands:
        band = make_band(rep, x, band_id, B, cache)
        columns[f"{band_id}_lower"] = band.lower
        columns[f"{band_id}_upper"] = band.upper
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for i in range(grid.size):
        w.writerow(fmt(float(col[i])) for col in columns.values())
    return buf.getvalue()


def run(cfg: ExperimentConfig) -> str:
    """Run an experiment and return its CSV text."""
    cfg.validate()
    if cfg.experiment == "curves":
        return run_curves(cfg)
    runner = {"mise": run_mise, "agg-curve": run_agg_curve, "bands": run_bands}[cfg.experiment]
    return rows_to_csv(runner(cfg))


__all__ = [
    "BANDS", "ESTIMATORS", "EXPERIMENTS", "ExperimentConfig", "NumericalError", "Row",
    "build_config", "read_config_file", "rows_to_csv", "run", "run_agg_curve",
    "run_bands", "run_curves", "run_mise",
]
