"""Tail cut-off selection by minimising a uniformity discrepancy.

For a candidate tail fraction ``kappa`` the threshold is the
``(1 - kappa) * 100``-th percentile of the working series. The tail sample is
fitted, its observations are mapped to ``U = exp(-exp(x'b) ln(y/w))`` (uniform
under a well-chosen threshold), and the mean squared gap between ``U`` and its
empirical CDF is recorded. The fraction with the smallest gap wins.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import GridExhausted, InputError, InsufficientData, NonConvergence, SingularDesign
from .estimators import fit as fit_estimator
from .model import TailSample, TailSide, log_excess

__all__ = [
    "DEFAULT_GRID",
    "ThresholdScan",
    "uniformized_residuals",
    "discrepancy",
    "percentile_threshold",
    "select_threshold",
]

log = logging.getLogger(__name__)

DEFAULT_GRID = tuple(round(k / 100, 2) for k in range(2, 51))
MIN_SERIES = 200
FLOOR_PER_COEF = 10


def uniformized_residuals(sample: TailSample, beta) -> np.ndarray:
    eta = sample.covariates @ np.asarray(beta, dtype=float)
    return np.exp(-np.exp(eta) * log_excess(sample))


def _discrepancy_u(u: np.ndarray) -> float:
    s = np.sort(u)
    # F_n at each sorted point; tied values share the highest rank
    F = np.searchsorted(s, s, side="right") / s.shape[0]
    return float(np.mean((s - F) ** 2))


def discrepancy(sample: TailSample, beta) -> float:
    return _discrepancy_u(uniformized_residuals(sample, beta))


def percentile_threshold(responses, kappa: float) -> float:
    """Linear-interpolation percentile at ``(1 - kappa) * 100``."""
    return float(np.percentile(np.asarray(responses, dtype=float), (1.0 - kappa) * 100.0, method="linear"))


def _estimable(kappa: float, n: int, k: int) -> bool:
    return math.floor(round(kappa * n, 9)) > FLOOR_PER_COEF * k


@dataclass(frozen=True, eq=False)
class ThresholdScan:
    kappa_grid: np.ndarray
    thresholds: np.ndarray
    tail_sizes: np.ndarray
    discrepancy: np.ndarray
    fits: tuple[np.ndarray, ...]
    estimator: str
    parent_size: int

    @property
    def best(self) -> int:
        # argmin returns the first minimum; grid is ascending so ties go to the smallest kappa
        return int(np.argmin(self.discrepancy))

    @property
    def kappa_star(self) -> float:
        return float(self.kappa_grid[self.best])

    @property
    def w_star(self) -> float:
        return float(self.thresholds[self.best])

    @property
    def beta_star(self) -> np.ndarray:
        return self.fits[self.best]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["kappa", "w", "discrepancy"])
        for k, w, d in zip(self.kappa_grid, self.thresholds, self.discrepancy):
            writer.writerow([repr(float(k)), repr(float(w)), repr(float(d))])
        return buf.getvalue()


def select_threshold(
    responses,
    covariates,
    estimator: str = "ols",
    grid=None,
    tail_side: TailSide | str = TailSide.RIGHT,
) -> ThresholdScan:
    """Scan tail fractions and keep the one with the smallest discrepancy.

    ``responses`` are on the working scale (negate first for a left tail) and
    ``covariates`` include the intercept. Grid points whose threshold is not
    positive, or whose tail cannot be fitted, are dropped from the scan.
    """
    y = np.asarray(responses, dtype=float)
    X = np.asarray(covariates, dtype=float)
    n, k = X.shape
    if y.shape[0] != n:
        raise InputError(f"{y.shape[0]} responses but {n} covariate rows")
    if n < MIN_SERIES:
        raise InsufficientData(f"threshold scan needs at least {MIN_SERIES} observations, got {n}")
    kappas = np.asarray(DEFAULT_GRID if grid is None else grid, dtype=float)
    if kappas.size == 0 or np.any((kappas <= 0) | (kappas > 1)) or np.any(np.diff(kappas) <= 0):
        raise InputError("grid must be strictly increasing tail fractions in (0, 1]")
    kappas = np.array([kp for kp in kappas if _estimable(kp, n, k)])
    if kappas.size == 0:
        raise GridExhausted(f"no tail fraction leaves more than {FLOOR_PER_COEF * k} observations out of {n}")
    ws = np.percentile(y, (1.0 - kappas) * 100.0, method="linear")

    kept_k, kept_w, kept_n, kept_d, fits = [], [], [], [], []
    for kp, w in zip(kappas, ws):
        if not w > 0:
            log.debug("kappa=%.4g skipped: threshold %.6g is not positive", kp, w)
            continue
        mask = y > w
        sample = TailSample(y[mask], X[mask], float(w), tail_side, parent_size=n)
        if sample.n0 <= k:
            continue
        try:
            beta = fit_estimator(sample, estimator).beta_hat
        except (SingularDesign, NonConvergence) as exc:
            log.info("kappa=%.4g skipped: %s", kp, exc)
            continue
        kept_k.append(float(kp))
        kept_w.append(float(w))
        kept_n.append(sample.n0)
        kept_d.append(discrepancy(sample, beta))
        fits.append(beta)
    if not kept_k:
        raise GridExhausted("no grid point produced a usable fit")
    return ThresholdScan(
        kappa_grid=np.array(kept_k),
        thresholds=np.array(kept_w),
        tail_sizes=np.array(kept_n, dtype=int),
        discrepancy=np.array(kept_d),
        fits=tuple(fits),
        estimator=estimator,
        parent_size=n,
    )
