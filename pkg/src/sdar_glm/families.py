"""Exponential-family losses: values, gradients, and active-set Hessians.

Everything the solver needs from a GLM is the cumulant c(theta) of the
response family together with its first two derivatives.  The negative
log-likelihood of a coefficient vector beta on data (X, y) is

    L(beta) = -(1/n) * sum_i [ y_i * theta_i - c(theta_i) + d(y_i) ],
    theta_i = x_i . beta,

which is convex in beta because c is convex.  Two families are provided:
logistic (Bernoulli, d = 0) and Gaussian with unit dispersion
(d(y) = -y^2/2, which makes L equal to ||y - X beta||^2 / (2n)).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit


class NumericOverflowError(ArithmeticError):
    """A linear predictor x_i . beta evaluated to a non-finite value."""

    def __init__(self, row: int):
        self.row = int(row)
        super().__init__(f"linear predictor overflowed at observation {self.row}")


class GlmFamily:
    """Exponential family with log-density y*theta - c(theta) + d(y)."""

    name: str = ""

    def cumulant(self, theta: np.ndarray) -> np.ndarray:
        """c(theta)."""
        raise NotImplementedError

    def mean(self, theta: np.ndarray) -> np.ndarray:
        """c'(theta), the conditional mean of y."""
        raise NotImplementedError

    def variance(self, theta: np.ndarray) -> np.ndarray:
        """c''(theta), the conditional variance of y."""
        raise NotImplementedError

    def base_measure(self, y: np.ndarray) -> np.ndarray:
        """d(y)."""
        raise NotImplementedError

    def check_response(self, y: np.ndarray) -> None:
        """Raise ValueError when y is not a valid response for this family."""

    def __repr__(self) -> str:
        return f"{type(self).__name__}()"


class Logistic(GlmFamily):
    """Bernoulli responses y in {0, 1}; c(theta) = log(1 + exp(theta)).

    The cumulant is evaluated as max(theta, 0) + log1p(exp(-|theta|)) and
    the mean through the numerically stable sigmoid, so both stay finite
    for any finite theta (the naive form overflows near theta = 710).
    """

    name = "logistic"

    def cumulant(self, theta):
        theta = np.asarray(theta, dtype=float)
        return np.maximum(theta, 0.0) + np.log1p(np.exp(-np.abs(theta)))

    def mean(self, theta):
        return expit(np.asarray(theta, dtype=float))

    def variance(self, theta):
        mu = expit(np.asarray(theta, dtype=float))
        return mu * (1.0 - mu)

    def base_measure(self, y):
        return np.zeros_like(np.asarray(y, dtype=float))

    def check_response(self, y):
        y = np.asarray(y)
        bad = ~((y == 0.0) | (y == 1.0))
        if np.any(bad):
            offenders = np.unique(y[bad])
            raise ValueError(
                f"logistic responses must lie in {{0, 1}}; found {offenders[:5].tolist()}"
            )


class Gaussian(GlmFamily):
    """Gaussian responses with unit dispersion; c(theta) = theta^2 / 2."""

    name = "gaussian"

    def cumulant(self, theta):
        theta = np.asarray(theta, dtype=float)
        return 0.5 * theta * theta

    def mean(self, theta):
        return np.asarray(theta, dtype=float)

    def variance(self, theta):
        return np.ones_like(np.asarray(theta, dtype=float))

    def base_measure(self, y):
        y = np.asarray(y, dtype=float)
        return -0.5 * y * y


LOGISTIC = Logistic()
GAUSSIAN = Gaussian()

_FAMILIES = {f.name: f for f in (LOGISTIC, GAUSSIAN)}


def get_family(name: str) -> GlmFamily:
    """Look up a family by name ("logistic" or "gaussian")."""
    try:
        return _FAMILIES[name.lower()]
    except KeyError:
        raise ValueError(
            f"unknown family {name!r}; choose from {sorted(_FAMILIES)}"
        ) from None


@dataclass(frozen=True)
class Dataset:
    """Dense design matrix (n observations by p predictors) plus responses.

    All entries must be finite.  n = 0 is allowed so that an empty test
    split is representable; solvers reject empty data themselves.
    """

    X: np.ndarray
    y: np.ndarray
    feature_names: tuple[str, ...] | None = None

    def __post_init__(self):
        X = np.ascontiguousarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=float).ravel()
        if X.ndim != 2:
            raise ValueError(f"X must be 2-d, got shape {np.shape(self.X)}")
        if X.shape[1] < 1:
            raise ValueError("X must have at least one column")
        if y.shape[0] != X.shape[0]:
            raise ValueError(f"X has {X.shape[0]} rows but y has {y.shape[0]} entries")
        if not np.all(np.isfinite(X)):
            raise ValueError("X contains non-finite entries")
        if not np.all(np.isfinite(y)):
            raise ValueError("y contains non-finite entries")
        if self.feature_names is not None and len(self.feature_names) != X.shape[1]:
            raise ValueError("feature_names length must equal the number of columns")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]


def linear_predictor(data: Dataset, beta: np.ndarray) -> np.ndarray:
    """X @ beta, verified finite entrywise.

    Raises NumericOverflowError naming the first offending observation when
    the product is not finite (huge inputs, or non-finite beta).
    """
    with np.errstate(over="ignore", invalid="ignore"):
        theta = data.X @ np.asarray(beta, dtype=float)
    if not np.all(np.isfinite(theta)):
        raise NumericOverflowError(int(np.flatnonzero(~np.isfinite(theta))[0]))
    return theta


def negative_log_likelihood(family: GlmFamily, data: Dataset, beta: np.ndarray) -> float:
    """L(beta) = -(1/n) sum_i [y_i theta_i - c(theta_i) + d(y_i)]."""
    theta = linear_predictor(data, beta)
    terms = data.y * theta - family.cumulant(theta) + family.base_measure(data.y)
    return float(-np.mean(terms))


def gradient(family: GlmFamily, data: Dataset, beta: np.ndarray) -> np.ndarray:
    """grad L(beta) = (1/n) X^T (c'(X beta) - y)."""
    theta = linear_predictor(data, beta)
    return data.X.T @ (family.mean(theta) - data.y) / data.n


def hessian_active(
    family: GlmFamily, data: Dataset, beta: np.ndarray, active: np.ndarray
) -> np.ndarray:
    """Restricted Hessian (1/n) X_A^T diag(c''(X beta)) X_A.

    Built as M^T M with M = diag(sqrt(w)) X_A and symmetrized by averaging,
    so the result is exactly symmetric and positive semidefinite.
    """
    active = np.asarray(active, dtype=int)
    if active.size == 0:
        raise ValueError("active set must be nonempty")
    theta = linear_predictor(data, beta)
    w = family.variance(theta)
    M = data.X[:, active] * np.sqrt(w)[:, None]
    H = M.T @ M / data.n
    return 0.5 * (H + H.T)
