"""Core tail-sample type and the double-logarithmic Pareto transform.

If ``y`` is Pareto above ``w`` with index ``alpha(x) = exp(x'beta)``, then

    z = -ln(ln(y / w)) - euler_gamma = x'beta + xi

where ``xi`` is a centred standard Gumbel error with variance pi^2/6. Every
estimator in the package works on a :class:`TailSample` and this transform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DegenerateObservation, DimensionMismatch, InputError, UnsupportedDesign

__all__ = [
    "EULER_GAMMA",
    "GUMBEL_VARIANCE",
    "TailSide",
    "TailSample",
    "add_intercept",
    "tail_subsample",
    "log_excess",
    "transform_response",
    "tail_index",
    "expected_tail_index",
]

# Mean and variance of the standard Gumbel law.
EULER_GAMMA: float = 0.5772156649015329
GUMBEL_VARIANCE: float = math.pi**2 / 6.0


class TailSide(str, Enum):
    RIGHT = "right"
    LEFT = "left"


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class TailSample:
    """Observations above a tail threshold.

    ``responses`` are already on the working (right-tail) scale: for a left
    tail the raw series has been negated before thresholding, and
    ``tail_side`` is kept only as a label.

    Rank of ``covariates`` is not checked here; the estimators raise
    :class:`~tailreg.errors.SingularDesign` on a rank-deficient design.
    """

    responses: np.ndarray
    covariates: np.ndarray
    threshold: float
    tail_side: TailSide = TailSide.RIGHT
    parent_size: int | None = None

    def __post_init__(self) -> None:
        y = _frozen(self.responses)
        X = _frozen(self.covariates)
        if y.ndim != 1:
            raise DimensionMismatch("responses must be a vector")
        if X.ndim == 1:
            X = _frozen(X[:, None])
        if X.ndim != 2 or X.shape[0] != y.shape[0]:
            raise DimensionMismatch(
                f"covariates shape {X.shape} does not match {y.shape[0]} responses"
            )
        if y.shape[0] == 0:
            raise InputError("empty tail sample")
        if not np.all(X[:, 0] == 1.0):
            raise InputError("first covariate column must be the intercept (all ones)")
        if not (np.isfinite(self.threshold) and self.threshold > 0):
            raise InputError(f"threshold must be a positive finite number, got {self.threshold}")
        if not np.all(np.isfinite(y)) or not np.all(np.isfinite(X)):
            raise InputError("non-finite values in tail sample")
        bad = np.flatnonzero(~(y > self.threshold))
        if bad.size:
            raise DegenerateObservation(
                f"{bad.size} response(s) do not strictly exceed the threshold "
                f"{self.threshold!r} (first at position {bad[0]})"
            )
        parent = y.shape[0] if self.parent_size is None else int(self.parent_size)
        if parent < y.shape[0]:
            raise InputError(f"parent_size {parent} is smaller than the tail size {y.shape[0]}")
        object.__setattr__(self, "responses", y)
        object.__setattr__(self, "covariates", X)
        object.__setattr__(self, "threshold", float(self.threshold))
        object.__setattr__(self, "tail_side", TailSide(self.tail_side))
        object.__setattr__(self, "parent_size", parent)

    @property
    def n0(self) -> int:
        return self.responses.shape[0]

    @property
    def n_coef(self) -> int:
        return self.covariates.shape[1]

    def select_columns(self, columns) -> TailSample:
        """Same observations, fitted on a subset of covariate columns."""
        columns = list(columns)
        if not columns or columns[0] != 0:
            raise InputError("column subset must start with the intercept column 0")
        return TailSample(
            self.responses,
            self.covariates[:, columns],
            self.threshold,
            self.tail_side,
            self.parent_size,
        )


def add_intercept(covariates) -> np.ndarray:
    """Prepend a column of ones to an ``n x p`` (or length-``n``) array."""
    X = np.asarray(covariates, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    return np.column_stack([np.ones(X.shape[0]), X])


def tail_subsample(
    responses,
    covariates,
    threshold: float,
    tail_side: TailSide | str = TailSide.RIGHT,
) -> TailSample:
    """Keep the rows whose response strictly exceeds ``threshold``.

    ``responses`` must already be on the working scale (negated for a left
    tail); ``covariates`` must include the intercept column.
    """
    y = np.asarray(responses, dtype=float)
    X = np.asarray(covariates, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.shape[0] != y.shape[0]:
        raise DimensionMismatch(f"{y.shape[0]} responses but {X.shape[0]} covariate rows")
    keep = y > threshold
    return TailSample(y[keep], X[keep], threshold, tail_side, parent_size=y.shape[0])


def log_excess(sample: TailSample) -> np.ndarray:
    """``ln(y / w)`` for every observation (strictly positive)."""
    return np.log(sample.responses / sample.threshold)


def transform_response(sample: TailSample) -> np.ndarray:
    """Dependent variable of the linear tail-index regression."""
    excess = log_excess(sample)
    if not np.all(excess > 0):
        raise DegenerateObservation("ln(y/w) is not positive for every observation")
    return -np.log(excess) - EULER_GAMMA


def tail_index(beta, x) -> np.ndarray | float:
    """``exp(x'beta)`` for a single covariate row or a matrix of rows."""
    beta = np.asarray(beta, dtype=float)
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != beta.shape[0]:
        raise DimensionMismatch(f"covariate length {x.shape[-1]} != coefficient length {beta.shape[0]}")
    out = np.exp(x @ beta)
    return float(out) if out.ndim == 0 else out


def expected_tail_index(beta) -> float:
    """Mean of ``exp(x'beta)`` when ``x = (1, U(0,1), N(0,1))``."""
    beta = np.asarray(beta, dtype=float)
    if beta.shape != (3,):
        raise UnsupportedDesign("closed form only holds for the three-coefficient design (1, U(0,1), N(0,1))")
    b1, b2, b3 = beta
    # (e^b - 1)/b -> 1 as b -> 0; expm1 keeps precision near zero.
    uniform_mgf = 1.0 if b2 == 0.0 else math.expm1(b2) / b2
    return uniform_mgf * math.exp(b1 + 0.5 * b3**2)
