"""Seedable draws from the Pareto, Burr and Gumbel laws used in the experiments.

Every random stream is a PCG64 generator keyed by ``(master_seed, stream_id)``
through :class:`numpy.random.SeedSequence` spawn keys, so replication ``i`` of
an experiment always sees the same numbers whatever order replications run in.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, InputError

__all__ = [
    "COVARIATE_LAWS",
    "SeedSpec",
    "DgpSpec",
    "Dataset",
    "make_rng",
    "open_uniform",
    "sample_pareto",
    "sample_burr",
    "pareto_cdf",
    "burr_cdf",
    "burr_survival",
    "sample_gumbel",
    "generate_dataset",
]

COVARIATE_LAWS = ("uniform01", "std_normal")
FAMILIES = ("pareto", "burr")

_U64 = 2**64


@dataclass(frozen=True)
class SeedSpec:
    master_seed: int = 0
    stream_id: int = 0

    def __post_init__(self) -> None:
        for name in ("master_seed", "stream_id"):
            v = getattr(self, name)
            if not (0 <= int(v) < _U64):
                raise InputError(f"{name} must be an unsigned 64-bit integer, got {v}")


def make_rng(seed: SeedSpec) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed.master_seed), spawn_key=(int(seed.stream_id),))
    return np.random.Generator(np.random.PCG64(ss))


def open_uniform(rng: np.random.Generator, size: int) -> np.ndarray:
    """Uniform draws on the open interval (0, 1); exact zeros are redrawn."""
    u = rng.random(size)
    zero = u == 0.0
    while zero.any():
        u[zero] = rng.random(int(zero.sum()))
        zero = u == 0.0
    return u


def _check_u(u: np.ndarray) -> None:
    if not np.all((u > 0.0) & (u < 1.0)):
        raise DomainError("uniform argument must lie in the open interval (0, 1)")


def sample_pareto(alpha, threshold, u):
    """Inverse Pareto CDF: ``w * (1 - u) ** (-1 / alpha)``. Vectorised."""
    alpha = np.asarray(alpha, dtype=float)
    u = np.asarray(u, dtype=float)
    _check_u(u)
    if np.any(alpha <= 0) or not threshold > 0:
        raise DomainError("alpha and threshold must be positive")
    out = threshold * np.exp(-np.log1p(-u) / alpha)
    return float(out) if out.ndim == 0 else out


def pareto_cdf(y, alpha, threshold):
    y = np.asarray(y, dtype=float)
    return -np.expm1(-alpha * np.log(y / threshold))


def sample_burr(alpha, rho, u):
    """Inverse of ``F(x) = 1 - (1 + x**(-alpha*rho)) ** (1/rho)`` for ``rho < 0``."""
    alpha = np.asarray(alpha, dtype=float)
    u = np.asarray(u, dtype=float)
    _check_u(u)
    if np.any(alpha <= 0):
        raise DomainError("alpha must be positive")
    if not rho < 0:
        raise DomainError(f"Burr rho must be negative, got {rho}")
    # ((1-u)^rho - 1)^(-1/(alpha*rho)), with expm1/log1p for small u
    base = np.expm1(rho * np.log1p(-u))
    out = np.exp(np.log(base) * (-1.0 / (alpha * rho)))
    return float(out) if out.ndim == 0 else out


def burr_survival(x, alpha, rho):
    x = np.asarray(x, dtype=float)
    return np.exp(np.log1p(x ** (-alpha * rho)) / rho)


def burr_cdf(x, alpha, rho):
    return -np.expm1(np.log1p(np.asarray(x, dtype=float) ** (-alpha * rho)) / rho)


def sample_gumbel(seed: SeedSpec, count: int) -> np.ndarray:
    """Standard Gumbel draws, CDF ``exp(-exp(-a))``."""
    if count < 1:
        raise InputError("count must be at least 1")
    u = open_uniform(make_rng(seed), count)
    return -np.log(-np.log1p(-u))


@dataclass(frozen=True)
class DgpSpec:
    """Generating process: ``y | x`` Pareto or Burr with index ``exp(x'beta)``.

    ``covariate_laws`` lists the law of each non-intercept column. The
    threshold only applies to the Pareto family; Burr draws live on (0, inf).
    """

    beta: tuple[float, ...] = (0.1, 1.0, 1.0)
    covariate_laws: tuple[str, ...] = ("uniform01", "std_normal")
    family: str = "pareto"
    rho: float = -1.0
    threshold: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "beta", tuple(float(b) for b in self.beta))
        object.__setattr__(self, "covariate_laws", tuple(self.covariate_laws))
        if self.family not in FAMILIES:
            raise InputError(f"family must be one of {FAMILIES}, got {self.family!r}")
        if not np.all(np.isfinite(self.beta)):
            raise InputError("beta must be finite")
        if len(self.covariate_laws) != len(self.beta) - 1:
            raise InputError(
                f"need {len(self.beta) - 1} covariate laws for {len(self.beta)} coefficients, "
                f"got {len(self.covariate_laws)}"
            )
        for law in self.covariate_laws:
            if law not in COVARIATE_LAWS:
                raise InputError(f"unknown covariate law {law!r}; choose from {COVARIATE_LAWS}")
        if self.family == "burr" and not self.rho < 0:
            raise InputError(f"Burr rho must be negative, got {self.rho}")
        if not self.threshold > 0:
            raise InputError("threshold must be positive")

    @property
    def n_coef(self) -> int:
        return len(self.beta)


@dataclass(frozen=True, eq=False)
class Dataset:
    responses: np.ndarray
    covariates: np.ndarray  # includes the intercept column
    spec: DgpSpec = field(repr=False)

    @property
    def tail_index(self) -> np.ndarray:
        return np.exp(self.covariates @ np.asarray(self.spec.beta))


def generate_dataset(spec: DgpSpec, n: int, seed: SeedSpec) -> Dataset:
    """Draw ``n`` i.i.d. rows ``(y_t, x_t)``.

    Draw order within a stream is fixed: covariate columns left to right,
    then one uniform per row for the response.
    """
    if n < spec.n_coef + 1:
        raise InputError(f"n={n} must be at least K+1={spec.n_coef + 1}")
    rng = make_rng(seed)
    X = np.empty((n, spec.n_coef))
    X[:, 0] = 1.0
    for j, law in enumerate(spec.covariate_laws, start=1):
        X[:, j] = open_uniform(rng, n) if law == "uniform01" else rng.standard_normal(n)
    alpha = np.exp(X @ np.asarray(spec.beta))
    u = open_uniform(rng, n)
    if spec.family == "pareto":
        y = sample_pareto(alpha, spec.threshold, u)
    else:
        y = sample_burr(alpha, spec.rho, u)
    return Dataset(np.asarray(y, dtype=float), X, spec)
