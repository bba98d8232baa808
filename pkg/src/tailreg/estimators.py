"""OLS and exponential-regression MLE estimators of the tail-index coefficients.

OLS regresses the transformed response ``z`` on ``X``; its covariance is
either the closed form ``(pi^2/6)(X'X)^{-1}`` (exact Pareto, correct
specification) or a Bartlett-kernel Newey-West sandwich. The MLE maximises
the average Pareto log-likelihood by Newton's method with step halving.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, stats

from .errors import BandwidthTooLarge, InputError, NonConvergence, SingularDesign
from .model import GUMBEL_VARIANCE, TailSample, log_excess, transform_response

__all__ = [
    "FitResult",
    "ols_fit",
    "ols_cov_iid",
    "ols_cov_hac",
    "default_bandwidth",
    "mle_fit",
    "hill_estimator",
    "log_likelihood",
    "score",
    "hessian",
    "t_stats",
    "fit",
]

RCOND_MIN = 1e-12
GRAD_TOL = 1e-8
STEP_TOL = 1e-10
MAX_ITER = 100
MAX_HALVINGS = 30
_LL_ROUNDING = 64 * np.finfo(float).eps

COV_KINDS = ("iid", "hac")


@dataclass(frozen=True, eq=False)
class FitResult:
    beta_hat: np.ndarray
    covariance: np.ndarray
    method: str  # "ols" | "mle"
    cov_kind: str  # "iid" | "hac" | "mle_information"
    n0: int
    bandwidth: int | None = None
    iterations: int = 0
    converged: bool = True
    diagnostics: dict = field(default_factory=dict)

    @property
    def std_errors(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diag(self.covariance), 0.0, None))

    def to_dict(self) -> dict:
        return {
            "beta_hat": self.beta_hat.tolist(),
            "covariance": self.covariance.tolist(),
            "std_errors": self.std_errors.tolist(),
            "method": self.method,
            "cov_kind": self.cov_kind,
            "bandwidth": self.bandwidth,
            "n0": self.n0,
            "iterations": self.iterations,
            "converged": self.converged,
        }


# --------------------------------------------------------------------------- OLS


def _qr(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    Q, R = np.linalg.qr(X, mode="reduced")
    sv = np.linalg.svd(R, compute_uv=False)
    # rcond of X'X is the squared rcond of X
    if sv[-1] == 0.0 or (sv[-1] / sv[0]) ** 2 < RCOND_MIN:
        raise SingularDesign("design matrix is numerically rank deficient")
    return Q, R


def _xtx_inv(R: np.ndarray) -> np.ndarray:
    Rinv = linalg.solve_triangular(R, np.eye(R.shape[0]))
    out = Rinv @ Rinv.T
    return 0.5 * (out + out.T)


def default_bandwidth(n0: int) -> int:
    """Newey-West rule of thumb ``floor(4 (n0/100)^(2/9))``."""
    return int(math.floor(4.0 * (n0 / 100.0) ** (2.0 / 9.0)))


def ols_cov_iid(sample: TailSample, residuals=None) -> np.ndarray:
    """``(pi^2/6) (X'X)^{-1}``; the Gumbel error variance is known, so
    ``residuals`` are not used."""
    _, R = _qr(sample.covariates)
    return GUMBEL_VARIANCE * _xtx_inv(R)


def ols_cov_hac(sample: TailSample, residuals, bandwidth: int | None = None) -> np.ndarray:
    """Newey-West sandwich ``S^{-1} V S^{-1} / n0`` with ``S = X'X/n0``.

    ``V`` is the Bartlett-weighted long-run covariance of ``x_t * e_t``,
    residuals taken in the stored row order. ``bandwidth=0`` gives White's
    heteroskedasticity-robust estimator.
    """
    X = sample.covariates
    e = np.asarray(residuals, dtype=float)
    n0 = X.shape[0]
    b = default_bandwidth(n0) if bandwidth is None else int(bandwidth)
    if b < 0:
        raise InputError("bandwidth must be nonnegative")
    if b >= n0:
        raise BandwidthTooLarge(f"bandwidth {b} must be smaller than the tail size {n0}")
    _, R = _qr(X)
    g = X * e[:, None]
    V = g.T @ g / n0
    for j in range(1, b + 1):
        gamma_j = g[j:].T @ g[:-j] / n0
        V += (1.0 - j / (b + 1.0)) * (gamma_j + gamma_j.T)
    S_inv = n0 * _xtx_inv(R)
    cov = S_inv @ V @ S_inv / n0
    return 0.5 * (cov + cov.T)


def ols_fit(sample: TailSample, cov_kind: str = "iid", bandwidth: int | None = None) -> FitResult:
    """Least squares on the transformed regression via a QR factorisation."""
    if cov_kind not in COV_KINDS:
        raise InputError(f"cov_kind must be one of {COV_KINDS}, got {cov_kind!r}")
    X = sample.covariates
    n0, k = X.shape
    if n0 <= k:
        raise InputError(f"need more observations than coefficients (n0={n0}, K={k})")
    z = transform_response(sample)
    Q, R = _qr(X)
    beta = linalg.solve_triangular(R, Q.T @ z)
    resid = z - X @ beta
    if cov_kind == "iid":
        cov = GUMBEL_VARIANCE * _xtx_inv(R)
        b = None
    else:
        b = default_bandwidth(n0) if bandwidth is None else int(bandwidth)
        cov = ols_cov_hac(sample, resid, b)
    return FitResult(
        beta_hat=beta,
        covariance=cov,
        method="ols",
        cov_kind=cov_kind,
        n0=n0,
        bandwidth=b,
        diagnostics={
            "residual_variance": float(resid @ resid / (n0 - k)),
            "max_abs_xt_resid": float(np.max(np.abs(X.T @ resid)) / n0),
        },
    )


# --------------------------------------------------------------------------- MLE


def log_likelihood(sample: TailSample, beta) -> float:
    """Average Pareto log-likelihood, dropping the constant ``-ln w``."""
    eta = sample.covariates @ np.asarray(beta, dtype=float)
    L = log_excess(sample)
    return float(np.mean(eta - (np.exp(eta) + 1.0) * L))


def score(sample: TailSample, beta) -> np.ndarray:
    X = sample.covariates
    L = log_excess(sample)
    resid = 1.0 - np.exp(X @ np.asarray(beta, dtype=float)) * L
    return X.T @ resid / X.shape[0]


def hessian(sample: TailSample, beta) -> np.ndarray:
    X = sample.covariates
    wts = np.exp(X @ np.asarray(beta, dtype=float)) * log_excess(sample)
    H = -(X * wts[:, None]).T @ X / X.shape[0]
    return 0.5 * (H + H.T)


def hill_estimator(sample: TailSample) -> float:
    """Closed-form constant-index MLE ``n0 / sum ln(y/w)``."""
    return sample.n0 / float(np.sum(log_excess(sample)))


def _newton(X: np.ndarray, L: np.ndarray, beta: np.ndarray) -> tuple[np.ndarray, np.ndarray, int]:
    n0 = X.shape[0]

    def parts(b):
        eta = X @ b
        eL = np.exp(eta) * L
        return float(np.mean(eta - eL - L)), eL

    ll, eL = parts(beta)
    if not np.isfinite(ll):
        raise NonConvergence("log-likelihood is not finite at the initial value")
    for it in range(MAX_ITER + 1):
        G = X.T @ (1.0 - eL) / n0
        negH = (X * eL[:, None]).T @ X / n0
        try:
            step = linalg.solve(negH, G, assume_a="pos")
        except (linalg.LinAlgError, ValueError) as exc:
            raise SingularDesign(f"Hessian is singular at iteration {it}") from exc
        grad_ok = np.max(np.abs(G)) < GRAD_TOL
        if grad_ok and np.max(np.abs(step)) < STEP_TOL:
            return beta, negH, it
        if it == MAX_ITER:
            break
        t = 1.0
        for h in range(MAX_HALVINGS + 1):
            cand = beta + t * step
            ll_c, eL_c = parts(cand)
            if ll_c > ll:
                beta, ll, eL = cand, ll_c, eL_c
                break
            if h == 0 and ll_c >= ll - _LL_ROUNDING * max(1.0, abs(ll)):
                # gain below float resolution of ll: judge the full step by the gradient
                G_c = X.T @ (1.0 - eL_c) / n0
                if np.max(np.abs(G_c)) < np.max(np.abs(G)):
                    beta, ll, eL = cand, ll_c, eL_c
                    break
            t *= 0.5
        else:
            if grad_ok:
                return beta, negH, it
            raise NonConvergence(f"step halving failed at iteration {it} (|G|={np.max(np.abs(G)):.3g})")
    raise NonConvergence(f"no convergence after {MAX_ITER} Newton iterations")


def mle_fit(sample: TailSample, init=None) -> FitResult:
    """Newton-Raphson maximiser of the average log-likelihood.

    Starts from the OLS estimate unless ``init`` is given; if that start
    fails to converge the zero vector is tried once.
    """
    X = sample.covariates
    n0, k = X.shape
    if n0 <= k:
        raise InputError(f"need more observations than coefficients (n0={n0}, K={k})")
    _qr(X)
    L = log_excess(sample)
    if init is not None:
        starts = [np.asarray(init, dtype=float)]
    else:
        starts = [ols_fit(sample).beta_hat, np.zeros(k)]
    err: NonConvergence | None = None
    for b0 in starts:
        if b0.shape != (k,):
            raise InputError(f"init has length {b0.shape[0]}, expected {k}")
        try:
            beta, negH, iters = _newton(X, L, b0.copy())
            break
        except NonConvergence as exc:
            err = exc
    else:
        assert err is not None
        raise err
    cov = linalg.inv(negH) / n0
    G = X.T @ (1.0 - np.exp(X @ beta) * L) / n0
    return FitResult(
        beta_hat=beta,
        covariance=0.5 * (cov + cov.T),
        method="mle",
        cov_kind="mle_information",
        n0=n0,
        iterations=iters,
        converged=True,
        diagnostics={
            "log_likelihood": float(np.mean(X @ beta - (np.exp(X @ beta) + 1.0) * L)),
            "max_abs_score": float(np.max(np.abs(G))),
        },
    )


def fit(sample: TailSample, estimator: str = "ols", cov_kind: str = "iid", bandwidth: int | None = None) -> FitResult:
    if estimator == "ols":
        return ols_fit(sample, cov_kind, bandwidth)
    if estimator == "mle":
        return mle_fit(sample)
    raise InputError(f"estimator must be 'ols' or 'mle', got {estimator!r}")


def t_stats(fit: FitResult) -> tuple[np.ndarray, np.ndarray]:
    """z-ratios and two-sided p-values from the normal limit."""
    se = fit.std_errors
    if np.any(se <= 0):
        raise InputError("standard errors must be positive")
    t = fit.beta_hat / se
    return t, 2.0 * stats.norm.sf(np.abs(t))
