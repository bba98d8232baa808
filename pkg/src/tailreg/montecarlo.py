"""Replicated experiments comparing OLS and MLE tail-index estimators.

Replication ``i`` draws its data from stream ``(master_seed, i)`` and results
are reduced in replication order, so a report depends only on the config and
never on the number of worker processes.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import partial

import numpy as np

from .errors import ExperimentFailed, InputError, NonConvergence, SingularDesign
from .estimators import fit as fit_estimator
from .model import tail_subsample
from .samplers import DgpSpec, SeedSpec, generate_dataset
from .threshold import select_threshold

__all__ = [
    "McConfig",
    "EstimatorSummary",
    "McReport",
    "run_experiment",
    "TableReport",
    "reproduce_table",
    "TABLE_SIZES",
]

log = logging.getLogger(__name__)

ESTIMATORS = ("mle", "ols")
MAX_FAILURE_RATE = 0.01


@dataclass(frozen=True)
class McConfig:
    """One Monte Carlo cell.

    ``fit_columns`` indexes the generated design (0 is the intercept); leaving
    columns out reproduces the omitted-variable experiment. ``threshold_mode``
    is ``"fixed"`` (use ``fixed_threshold``, default the generating threshold)
    or ``"scan"`` (each estimator runs its own discrepancy scan per replication).
    """

    dgp: DgpSpec = field(default_factory=DgpSpec)
    n: int = 5000
    reps: int = 1000
    master_seed: int = 0
    estimators: tuple[str, ...] = ESTIMATORS
    fit_columns: tuple[int, ...] | None = None
    threshold_mode: str = "fixed"
    fixed_threshold: float | None = None
    grid: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        k = self.dgp.n_coef
        cols = tuple(range(k)) if self.fit_columns is None else tuple(int(c) for c in self.fit_columns)
        object.__setattr__(self, "fit_columns", cols)
        object.__setattr__(self, "estimators", tuple(self.estimators))
        if self.reps < 1:
            raise InputError("reps must be at least 1")
        if self.n < k + 1:
            raise InputError(f"n={self.n} must be at least K+1={k + 1}")
        if not cols or cols[0] != 0 or len(set(cols)) != len(cols) or any(c < 0 or c >= k for c in cols):
            raise InputError(f"fit_columns must be distinct indices in [0, {k}) starting with 0, got {cols}")
        if not self.estimators or any(e not in ESTIMATORS for e in self.estimators):
            raise InputError(f"estimators must be a non-empty subset of {ESTIMATORS}")
        if self.threshold_mode not in ("fixed", "scan"):
            raise InputError(f"threshold_mode must be 'fixed' or 'scan', got {self.threshold_mode!r}")
        if self.fixed_threshold is not None and not self.fixed_threshold > 0:
            raise InputError("fixed_threshold must be positive")

    @property
    def truth(self) -> np.ndarray:
        return np.asarray(self.dgp.beta)[list(self.fit_columns)]


def _replicate(config: McConfig, rep: int) -> dict[str, tuple[np.ndarray | None, float | None]]:
    data = generate_dataset(config.dgp, config.n, SeedSpec(config.master_seed, rep))
    X = data.covariates[:, list(config.fit_columns)]
    out: dict[str, tuple[np.ndarray | None, float | None]] = {}
    if config.threshold_mode == "fixed":
        w = config.dgp.threshold if config.fixed_threshold is None else config.fixed_threshold
        sample = tail_subsample(data.responses, X, w)
        for est in config.estimators:
            try:
                out[est] = (fit_estimator(sample, est).beta_hat, None)
            except (NonConvergence, SingularDesign) as exc:
                log.warning("replication %d, %s failed: %s", rep, est, exc)
                out[est] = (None, None)
    else:
        for est in config.estimators:
            try:
                scan = select_threshold(data.responses, X, est, config.grid)
                out[est] = (scan.beta_star, scan.kappa_star)
            except (NonConvergence, SingularDesign) as exc:
                log.warning("replication %d, %s scan failed: %s", rep, est, exc)
                out[est] = (None, None)
    return out


@dataclass(frozen=True, eq=False)
class EstimatorSummary:
    mean: np.ndarray
    rmse: np.ndarray
    n_ok: int
    n_failed: int
    kappa_mean: float | None = None
    kappa_sd: float | None = None


@dataclass(frozen=True, eq=False)
class McReport:
    config: McConfig
    summaries: dict[str, EstimatorSummary]
    estimates: dict[str, np.ndarray]  # reps x K, NaN rows for failed replications
    kappas: dict[str, np.ndarray]

    @property
    def truth(self) -> np.ndarray:
        return self.config.truth

    @property
    def ratio(self) -> np.ndarray | None:
        """rmse(OLS) / rmse(MLE) per coefficient."""
        if "ols" not in self.summaries or "mle" not in self.summaries:
            return None
        return self.summaries["ols"].rmse / self.summaries["mle"].rmse

    def to_dict(self) -> dict:
        cfg = asdict(self.config)
        out = {
            "config": cfg,
            "truth": self.truth.tolist(),
            "estimators": {
                name: {
                    "mean": s.mean.tolist(),
                    "rmse": s.rmse.tolist(),
                    "n_ok": s.n_ok,
                    "n_failed": s.n_failed,
                    "kappa_mean": s.kappa_mean,
                    "kappa_sd": s.kappa_sd,
                }
                for name, s in self.summaries.items()
            },
        }
        r = self.ratio
        out["ratio"] = None if r is None else r.tolist()
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_text(self) -> str:
        cfg = self.config
        names = list(self.summaries)
        lines = [
            f"{cfg.dgp.family} data, beta=({','.join(f'{v:g}' for v in cfg.dgp.beta)}), "
            f"n={cfg.n}, reps={cfg.reps}, fit columns={list(cfg.fit_columns)}, threshold={cfg.threshold_mode}",
            f"{'':6}{'':6}" + "".join(f"{e.upper():>9}" for e in names) + (f"{'ratio':>9}" if self.ratio is not None else ""),
        ]
        for j, t in enumerate(self.truth):
            for stat in ("mean", "rmse"):
                row = f"{('beta' + str(j + 1)) if stat == 'mean' else '':<6}{stat:<6}"
                row += "".join(f"{getattr(self.summaries[e], stat)[j]:9.3f}" for e in names)
                if stat == "rmse" and self.ratio is not None:
                    row += f"{self.ratio[j]:9.3f}"
                lines.append(row)
        if cfg.threshold_mode == "scan":
            lines.append(f"{'k*':<6}{'mean':<6}" + "".join(f"{self.summaries[e].kappa_mean:9.3f}" for e in names))
            lines.append(f"{'':<6}{'sd':<6}" + "".join(f"{self.summaries[e].kappa_sd:9.3f}" for e in names))
        fails = ", ".join(f"{e}={self.summaries[e].n_failed}" for e in names)
        lines.append(f"failed replications: {fails}")
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["estimator", "coef", "truth", "mean", "rmse", "ratio", "n_ok", "n_failed"])
        ratio = self.ratio
        for est, s in self.summaries.items():
            for j, t in enumerate(self.truth):
                writer.writerow([
                    est, f"beta{j + 1}", repr(float(t)), repr(float(s.mean[j])), repr(float(s.rmse[j])),
                    "" if ratio is None else repr(float(ratio[j])), s.n_ok, s.n_failed,
                ])
        return buf.getvalue()


def _summarise(est: np.ndarray, truth: np.ndarray, kap: np.ndarray) -> EstimatorSummary:
    ok = ~np.isnan(est[:, 0])
    good = est[ok]
    if good.shape[0] == 0:
        nan = np.full(truth.shape, np.nan)
        return EstimatorSummary(nan, nan, 0, int((~ok).sum()))
    mean = good.sum(axis=0) / good.shape[0]
    rmse = np.sqrt(((good - truth) ** 2).sum(axis=0) / good.shape[0])
    k_ok = kap[ok]
    k_mean = k_sd = None
    if np.all(np.isfinite(k_ok)):
        k_mean = float(k_ok.mean())
        k_sd = float(k_ok.std())
    return EstimatorSummary(mean, rmse, int(ok.sum()), int((~ok).sum()), k_mean, k_sd)


def run_experiment(config: McConfig, workers: int = 1) -> McReport:
    """Run every replication and aggregate mean and rmse per coefficient."""
    job = partial(_replicate, config)
    if workers <= 1 or config.reps == 1:
        results = [job(i) for i in range(config.reps)]
    else:
        chunk = max(1, config.reps // (4 * workers))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(job, range(config.reps), chunksize=chunk))

    k = len(config.fit_columns)
    estimates, kappas, summaries = {}, {}, {}
    for est in config.estimators:
        arr = np.full((config.reps, k), np.nan)
        kap = np.full(config.reps, np.nan)
        for i, res in enumerate(results):
            beta, kappa = res[est]
            if beta is not None:
                arr[i] = beta
                if kappa is not None:
                    kap[i] = kappa
        failed = int(np.isnan(arr[:, 0]).sum())
        if failed > MAX_FAILURE_RATE * config.reps:
            raise ExperimentFailed(f"{est}: {failed} of {config.reps} replications failed")
        estimates[est] = arr
        kappas[est] = kap
        summaries[est] = _summarise(arr, config.truth, kap)
    return McReport(config, summaries, estimates, kappas)


# --------------------------------------------------------------------------- benchmark tables

BETA_SETS = ((0.1, 1.0, 1.0), (0.1, 1.0, 0.64))
TABLE_SIZES = {"T1": (500, 1000, 5000), "T2": (500, 1000, 5000), "T3": (500, 1000, 5000)}
TABLE_TITLES = {
    "T1": "MLE and OLS estimates, correctly specified - Pareto data",
    "T2": "rmse of MLE and OLS estimates, correctly specified - Burr data (rho=-1), scanned threshold",
    "T3": "MLE and OLS estimates, x3 omitted from the fit - Pareto data",
}


def _cell_config(table_id: str, beta, n: int, reps: int, master_seed: int) -> McConfig:
    if table_id == "T1":
        return McConfig(DgpSpec(beta=beta), n=n, reps=reps, master_seed=master_seed)
    if table_id == "T2":
        return McConfig(
            DgpSpec(beta=beta, family="burr", rho=-1.0),
            n=n,
            reps=reps,
            master_seed=master_seed,
            threshold_mode="scan",
        )
    if table_id == "T3":
        return McConfig(DgpSpec(beta=beta), n=n, reps=reps, master_seed=master_seed, fit_columns=(0, 1))
    raise InputError(f"unknown table {table_id!r}; choose T1, T2 or T3")


@dataclass(frozen=True, eq=False)
class TableReport:
    table_id: str
    cells: dict[tuple[tuple[float, ...], int], McReport]

    @property
    def beta_sets(self):
        return sorted({b for b, _ in self.cells}, key=BETA_SETS.index)

    @property
    def sizes(self):
        return sorted({n for _, n in self.cells})

    def to_text(self) -> str:
        if self.table_id == "T2":
            return self._text_t2()
        return self._text_t13()

    def _text_t13(self) -> str:
        lines = [TABLE_TITLES[self.table_id]]
        head = f"{'':6}{'':6}"
        sets = self.beta_sets
        for b in sets:
            head += f"| {'beta=(' + ','.join(f'{v:g}' for v in b) + ')':^26}"
        lines.append(head)
        sub = f"{'':12}" + "".join(f"| {'MLE':>8}{'OLS':>8}{'ratio':>8}  " for _ in sets)
        lines.append(sub)
        width = len(sub)
        for n in self.sizes:
            lines.append("-" * width)
            lines.append(f"n={n}".center(width))
            k = len(self.cells[(sets[0], n)].truth)
            for j in range(k):
                for stat in ("mean", "rmse"):
                    label = f"beta{j + 1}" if stat == "mean" else ""
                    row = f"{label:<6}{stat:<6}"
                    for b in sets:
                        rep = self.cells[(b, n)]
                        m = getattr(rep.summaries["mle"], stat)[j]
                        o = getattr(rep.summaries["ols"], stat)[j]
                        r = f"{rep.ratio[j]:8.3f}" if stat == "rmse" else " " * 8
                        row += f"| {m:8.3f}{o:8.3f}{r}  "
                    lines.append(row.rstrip())
        lines.append("-" * width)
        lines.append("ratio = rmse(OLS)/rmse(MLE)")
        return "\n".join(lines) + "\n"

    def _text_t2(self) -> str:
        lines = [TABLE_TITLES["T2"]]
        for b in self.beta_sets:
            lines.append("beta=(" + ",".join(f"{v:g}" for v in b) + ")")
            head = f"{'':8}" + "".join(f"| {'n=' + str(n):^24}" for n in self.sizes)
            sub = f"{'':8}" + "".join(f"| {'MLE':>8}{'OLS':>8}{'ratio':>8}" for _ in self.sizes)
            lines += [head, sub, "-" * len(sub)]
            k = len(self.cells[(b, self.sizes[0])].truth)
            for j in range(k):
                row = f"{'beta' + str(j + 1):<8}"
                for n in self.sizes:
                    rep = self.cells[(b, n)]
                    row += f"| {rep.summaries['mle'].rmse[j]:8.3f}{rep.summaries['ols'].rmse[j]:8.3f}{rep.ratio[j]:8.3f}"
                lines.append(row)
            for stat in ("kappa_mean", "kappa_sd"):
                row = f"{'k* mean' if stat == 'kappa_mean' else 'k* sd':<8}"
                for n in self.sizes:
                    rep = self.cells[(b, n)]
                    row += f"| {getattr(rep.summaries['mle'], stat):8.3f}{getattr(rep.summaries['ols'], stat):8.3f}{'':8}"
                lines.append(row)
            lines.append("-" * len(sub))
        lines.append("ratio = rmse(OLS)/rmse(MLE); k* = tail fraction minimising the discrepancy")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "table": self.table_id,
            "cells": [
                {"beta": list(b), "n": n, **self.cells[(b, n)].to_dict()}
                for b in self.beta_sets
                for n in self.sizes
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["table", "beta_set", "n", "estimator", "coef", "truth", "mean", "rmse", "ratio", "n_ok", "n_failed"])
        for b in self.beta_sets:
            tag = ",".join(f"{v:g}" for v in b)
            for n in self.sizes:
                rep = self.cells[(b, n)]
                ratio = rep.ratio
                for est, s in rep.summaries.items():
                    for j, t in enumerate(rep.truth):
                        writer.writerow([
                            self.table_id, tag, n, est, f"beta{j + 1}", repr(float(t)),
                            repr(float(s.mean[j])), repr(float(s.rmse[j])),
                            "" if ratio is None else repr(float(ratio[j])), s.n_ok, s.n_failed,
                        ])
        return buf.getvalue()


def reproduce_table(
    table_id: str,
    scale: int = 1000,
    sizes=None,
    beta_sets=None,
    master_seed: int = 0,
    workers: int = 1,
) -> TableReport:
    """Run every cell of benchmark table ``table_id`` at ``scale`` replications."""
    table_id = table_id.upper()
    if table_id not in TABLE_SIZES:
        raise InputError(f"unknown table {table_id!r}; choose T1, T2 or T3")
    if scale < 100:
        raise InputError("scale must be at least 100 replications")
    sizes = TABLE_SIZES[table_id] if sizes is None else tuple(sizes)
    beta_sets = BETA_SETS if beta_sets is None else tuple(tuple(float(v) for v in b) for b in beta_sets)
    for b in beta_sets:
        if b not in BETA_SETS:
            raise InputError(f"beta set {b} is not one of the table configurations {BETA_SETS}")
    cells = {}
    for b in beta_sets:
        for n in sizes:
            cells[(b, n)] = run_experiment(_cell_config(table_id, b, n, scale, master_seed), workers)
    return TableReport(table_id, cells)

