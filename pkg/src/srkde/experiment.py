"""Monte-Carlo harness for the pointwise MSE of a density estimator.

For each sample size ``n`` and repeat ``r`` a fresh dataset is drawn from its
own random stream, the estimator is evaluated at fixed points with bandwidth
``sigma(n) = sigma_scale * (n / sigma_n0) ** sigma_exponent``, and squared
errors against the exact mixture density are averaged over repeats. The
slope of ``log10 MSE`` against ``log10 n`` summarizes the convergence rate.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .estimator import FixedEstimator
from .neighbors import default_threads
from .synthetic import GaussianMixture, make_rng, mixture_density, reference_mixture, sample_mixture, stream_seed

# Reference evaluation points, plus (0.1,0,0,0) as an alternative
# reading of the third one.
EVAL_POINTS = (
    ("(0,0,0,0)", (0.0, 0.0, 0.0, 0.0)),
    ("(0.05,0,0,0)", (0.05, 0.0, 0.0, 0.0)),
    ("(0,1,0,0)", (0.0, 1.0, 0.0, 0.0)),
    ("(0,0.1,0,0)", (0.0, 0.1, 0.0, 0.0)),
    ("(0.05,0.05,0,0)", (0.05, 0.05, 0.0, 0.0)),
    ("(0.1,0,0,0)", (0.1, 0.0, 0.0, 0.0)),
)
FULL_SCALE_N_LIST = (20000, 80000, 320000, 1280000)
DESK_N_LIST = (10000, 20000, 40000, 80000)

# Published reference values at the origin.
REFERENCE_ORIGIN_MSE = (3.23e-5, 1.43e-5, 5.98e-6, 2.18e-6)
REFERENCE_ORIGIN_SLOPE = -0.643

Estimator = Callable[[np.ndarray, np.ndarray, float], np.ndarray]


def fixed_super_radius(data: np.ndarray, points: np.ndarray, sigma: float) -> np.ndarray:
    """Default estimator: fixed-bandwidth super-radius kernel."""
    return FixedEstimator.from_sigma(data, sigma)(points)


@dataclass(frozen=True)
class ConvergenceConfig:
    n_list: tuple[int, ...] = DESK_N_LIST
    repeats: int = 100
    sigma_scale: float = 0.005
    sigma_n0: float = 10000.0
    sigma_exponent: float = -1.0 / 3.0
    eval_labels: tuple[str, ...] = tuple(lab for lab, _ in EVAL_POINTS)
    eval_points: tuple[tuple[float, ...], ...] = tuple(p for _, p in EVAL_POINTS)
    mixture: GaussianMixture = field(default_factory=reference_mixture)
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "n_list", tuple(int(n) for n in self.n_list))
        object.__setattr__(self, "eval_points", tuple(tuple(float(x) for x in p) for p in self.eval_points))
        object.__setattr__(self, "eval_labels", tuple(str(s) for s in self.eval_labels))
        self.validate()

    def validate(self):
        ns = self.n_list
        if len(ns) < 2:
            raise ValueError("n_list needs at least 2 sizes to fit a slope")
        if any(n < 1 for n in ns) or any(b <= a for a, b in zip(ns, ns[1:])):
            raise ValueError(f"n_list must be positive and strictly increasing, got {list(ns)}")
        if self.repeats < 2:
            raise ValueError(f"repeats must be >= 2, got {self.repeats}")
        if not (self.sigma_scale > 0 and self.sigma_n0 > 0):
            raise ValueError("sigma_scale and sigma_n0 must be > 0")
        if not self.eval_points:
            raise ValueError("no evaluation points")
        if len(self.eval_labels) != len(self.eval_points):
            raise ValueError("eval_labels and eval_points differ in length")
        if len(set(self.eval_labels)) != len(self.eval_labels):
            raise ValueError("eval_labels must be unique")
        for p in self.eval_points:
            if len(p) != self.mixture.m:
                raise ValueError(f"evaluation point {p} does not match mixture dimension {self.mixture.m}")
        if not self.mixture.is_density:
            raise ValueError("the truth mixture must have weights summing to 1")

    def sigma(self, n: int) -> float:
        return self.sigma_scale * (n / self.sigma_n0) ** self.sigma_exponent

    @classmethod
    def full_scale(cls, seed: int = 0) -> "ConvergenceConfig":
        return cls(n_list=FULL_SCALE_N_LIST, repeats=500, seed=seed)

    def to_dict(self) -> dict:
        return {
            "n_list": list(self.n_list),
            "repeats": self.repeats,
            "sigma_scale": self.sigma_scale,
            "sigma_n0": self.sigma_n0,
            "sigma_exponent": self.sigma_exponent,
            "eval_labels": list(self.eval_labels),
            "eval_points": [list(p) for p in self.eval_points],
            "mixture": self.mixture.to_dict(),
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ConvergenceConfig":
        known = {"n_list", "repeats", "sigma_scale", "sigma_n0", "sigma_exponent",
                 "eval_labels", "eval_points", "mixture", "seed"}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        kw = dict(d)
        mix = kw.get("mixture", "reference")
        if mix in ("reference", "paper"):
            kw["mixture"] = reference_mixture()
        elif isinstance(mix, dict):
            kw["mixture"] = GaussianMixture.from_dict(mix)
        else:
            raise ValueError(f"mixture must be 'reference' or an object, got {mix!r}")
        if "eval_points" in kw and "eval_labels" not in kw:
            kw["eval_labels"] = [_point_label(p) for p in kw["eval_points"]]
        return cls(**kw)

    @classmethod
    def load(cls, path) -> "ConvergenceConfig":
        path = Path(path)
        try:
            d = json.loads(path.read_text())
        except OSError as exc:
            raise OSError(f"cannot read config {path}: {exc.strerror or exc}") from exc
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: invalid JSON: {exc}") from exc
        return cls.from_dict(d)


def _point_label(p) -> str:
    return "(" + ",".join(f"{float(x):g}" for x in p) + ")"


@dataclass
class ConvergenceResult:
    """MSE table (``mse[point, size]``) with per-point log-log fits.

    ``slopes``/``intercepts`` are NaN for rows containing a zero MSE.
    ``wall_time`` is informational and excluded from equality and reports.
    """

    config: ConvergenceConfig
    truth: np.ndarray
    mse: np.ndarray
    slopes: np.ndarray
    intercepts: np.ndarray
    seeds: dict[int, list[int]]
    wall_time: float = field(default=0.0, compare=False)

    def __eq__(self, other):
        if not isinstance(other, ConvergenceResult):
            return NotImplemented
        return (
            self.config == other.config
            and np.array_equal(self.truth, other.truth)
            and np.array_equal(self.mse, other.mse)
            and np.array_equal(self.slopes, other.slopes, equal_nan=True)
            and np.array_equal(self.intercepts, other.intercepts, equal_nan=True)
            and self.seeds == other.seeds
        )

    def row(self, label: str) -> np.ndarray:
        return self.mse[self.config.eval_labels.index(label)]

    def slope(self, label: str) -> float:
        return float(self.slopes[self.config.eval_labels.index(label)])

    def to_dict(self) -> dict:
        def num(x):
            x = float(x)
            return None if math.isnan(x) else x

        cfg = self.config
        return {
            "config": cfg.to_dict(),
            "sigmas": [cfg.sigma(n) for n in cfg.n_list],
            "points": [
                {
                    "label": lab,
                    "point": list(p),
                    "truth": float(self.truth[i]),
                    "mse": [float(x) for x in self.mse[i]],
                    "slope": num(self.slopes[i]),
                    "intercept": num(self.intercepts[i]),
                }
                for i, (lab, p) in enumerate(zip(cfg.eval_labels, cfg.eval_points))
            ],
            "seeds": {str(n): s for n, s in self.seeds.items()},
            "seed_scheme": "Philox(SeedSequence([seed, repeat, n]).generate_state(1, uint64)[0])",
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ConvergenceResult":
        def num(x):
            return math.nan if x is None else float(x)

        pts = d["points"]
        return cls(
            config=ConvergenceConfig.from_dict(d["config"]),
            truth=np.array([p["truth"] for p in pts], dtype=float),
            mse=np.array([p["mse"] for p in pts], dtype=float),
            slopes=np.array([num(p["slope"]) for p in pts]),
            intercepts=np.array([num(p["intercept"]) for p in pts]),
            seeds={int(n): list(s) for n, s in d["seeds"].items()},
        )


def fit_slope(ns: Sequence[float], mses: Sequence[float]) -> tuple[float, float]:
    """Least-squares fit ``log10 mse = c log10 n + delta``; returns ``(c, delta)``."""
    x = np.asarray(ns, dtype=float)
    y = np.asarray(mses, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("ns and mses must be 1-D sequences of equal length")
    if len(x) < 2:
        raise ValueError("need at least 2 points to fit a slope")
    if np.any(x <= 0) or np.any(y <= 0) or not np.all(np.isfinite(y)):
        raise ValueError("sizes and MSEs must be positive and finite")
    lx, ly = np.log10(x), np.log10(y)
    dx = lx - lx.mean()
    sxx = float(dx @ dx)
    if sxx == 0:
        raise ValueError("all sample sizes are equal; slope is undefined")
    c = float(dx @ (ly - ly.mean())) / sxx
    delta = float(ly.mean() - c * lx.mean())
    return c, delta


def run_convergence(
    cfg: ConvergenceConfig,
    estimator: Estimator = fixed_super_radius,
    threads: int | None = None,
) -> ConvergenceResult:
    """Run the repeated-draw MSE experiment described by ``cfg``.

    ``estimator(data, points, sigma)`` returns estimates at each row of
    ``points``. Results do not depend on ``threads``: every (repeat, n) task
    has its own stream and squared errors are reduced in a fixed order.
    """
    cfg.validate()
    t0 = time.perf_counter()
    threads = default_threads() if threads is None else max(1, int(threads))
    points = np.array(cfg.eval_points, dtype=float)
    truth = np.atleast_1d(mixture_density(cfg.mixture, points))
    seeds = {n: [stream_seed(cfg.seed, r, n) for r in range(cfg.repeats)] for n in cfg.n_list}
    tasks = [(r, j, n) for j, n in enumerate(cfg.n_list) for r in range(cfg.repeats)]

    def one(task):
        r, j, n = task
        data = sample_mixture(cfg.mixture, n, make_rng(seeds[n][r]))
        est = np.asarray(estimator(data, points, cfg.sigma(n)), dtype=float).reshape(-1)
        return (est - truth) ** 2

    if threads == 1:
        errs = [one(t) for t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            errs = list(pool.map(one, tasks))

    sq = np.zeros((cfg.repeats, len(cfg.n_list), len(points)))
    for (r, j, _), e in zip(tasks, errs):
        sq[r, j] = e
    mse = sq.mean(axis=0).T

    slopes = np.full(len(points), math.nan)
    intercepts = np.full(len(points), math.nan)
    for i in range(len(points)):
        if np.all(mse[i] > 0):
            slopes[i], intercepts[i] = fit_slope(cfg.n_list, mse[i])
    return ConvergenceResult(cfg, truth, mse, slopes, intercepts, seeds, time.perf_counter() - t0)


def _csv_text(res: ConvergenceResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["point", *(f"n={n}" for n in res.config.n_list), "c"])
    for i, label in enumerate(res.config.eval_labels):
        c = res.slopes[i]
        w.writerow([label, *(f"{x:.10e}" for x in res.mse[i]), "nan" if math.isnan(c) else f"{c:.10e}"])
    return buf.getvalue()


def emit_result(res: ConvergenceResult, fmt: str, path=None) -> str:
    """Serialize ``res`` as ``"csv"`` (one row per point, one column per n, then c) or ``"json"``.

    Returns the text; also writes it to ``path`` when given.
    """
    if fmt == "csv":
        text = _csv_text(res)
    elif fmt == "json":
        text = json.dumps(res.to_dict(), indent=2) + "\n"
    else:
        raise ValueError(f"unknown report format {fmt!r}; use 'csv' or 'json'")
    if path is not None:
        path = Path(path)
        try:
            path.write_text(text)
        except OSError as exc:
            raise OSError(f"cannot write report {path}: {exc.strerror or exc}") from exc
    return text


def load_result(path) -> ConvergenceResult:
    return ConvergenceResult.from_dict(json.loads(Path(path).read_text()))
