"""Sparsity-level path with information-criterion selection.

The solver needs the cardinality T up front.  When T is unknown, fit a path
T = theta, 2*theta, ... up to a budget Q (default floor(n / log n)), each
point warm-started from the previous one, and pick the fit minimizing a
high-dimensional BIC

    HBIC(fit) = 2 n L(beta_hat) + |supp(beta_hat)| * log(log n) * log p.

The T = 0 point (beta = 0) is added analytically so the null model always
competes.  Ties go to the smaller T.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .families import Dataset, GlmFamily, NumericOverflowError, negative_log_likelihood
from .solver import FitResult, SdarConfig, SingularSystemError, Termination, gsdar_fit

__all__ = ["AgsdarConfig", "PathPoint", "PathResult", "hbic", "agsdar_fit"]


@dataclass(frozen=True)
class AgsdarConfig:
    """Path controls.

    increment_theta is the step between consecutive sparsity levels.
    max_support_q caps the largest level; None means floor(n / log n),
    and any cap is clamped to min(n - 1, p).  The optional early-stop
    thresholds end the path once the fitted NLL falls below nll_below or
    the sup-norm change between consecutive coefficient vectors falls
    below change_below; by default the whole path is fitted.  warm_start
    = False refits every level from zero (cold starts are independent, so
    levels can then be evaluated in parallel).
    """

    increment_theta: int = 1
    max_support_q: int | None = None
    nll_below: float | None = None
    change_below: float | None = None
    warm_start: bool = True
    inner: SdarConfig = SdarConfig(sparsity_t=1)  # sparsity_t is overridden per level

    def __post_init__(self):
        if self.increment_theta < 1:
            raise ValueError(f"increment_theta must be >= 1, got {self.increment_theta}")
        if self.max_support_q is not None and self.max_support_q < 1:
            raise ValueError(f"max_support_q must be >= 1, got {self.max_support_q}")
        if self.nll_below is not None and self.nll_below < 0.0:
            raise ValueError("nll_below must be nonnegative")
        if self.change_below is not None and self.change_below < 0.0:
            raise ValueError("change_below must be nonnegative")


@dataclass(frozen=True)
class PathPoint:
    t: int
    fit: FitResult
    hbic: float


@dataclass(frozen=True)
class PathResult:
    fits: tuple[PathPoint, ...]
    selected_t: int
    selected_fit: FitResult
    failures: tuple[tuple[int, str], ...] = ()


def hbic(fit: FitResult, n: int, p: int) -> float:
    """2 n L + |supp| log(log n) log p; needs n >= 3 so the penalty is positive."""
    if n < 3:
        raise ValueError(f"hbic needs n >= 3, got {n}")
    support_size = int(np.count_nonzero(fit.beta_hat))
    return 2.0 * n * fit.nll + support_size * math.log(math.log(n)) * math.log(p)


def _null_fit(family: GlmFamily, data: Dataset) -> FitResult:
    beta = np.zeros(data.p)
    return FitResult(
        beta_hat=beta,
        support=np.empty(0, dtype=int),
        nll=negative_log_likelihood(family, data, beta),
        kkt_residual=0.0,
        iters=0,
        termination=Termination.SUPPORT_STATIONARY,
    )


def agsdar_fit(family: GlmFamily, data: Dataset, cfg: AgsdarConfig) -> PathResult:
    """Fit the sparsity path and select the HBIC minimizer.

    A level whose solve fails is recorded in `failures` and skipped; the
    next level warm-starts from the last success.
    """
    n, p = data.n, data.p
    if n < 3:
        raise ValueError(f"path selection needs n >= 3, got {n}")
    q = cfg.max_support_q if cfg.max_support_q is not None else int(n / math.log(n))
    q = min(q, n - 1, p)

    null = _null_fit(family, data)
    points = [PathPoint(0, null, hbic(null, n, p))]
    failures: list[tuple[int, str]] = []
    prev_fit = null

    t = cfg.increment_theta
    while t <= q:
        inner = replace(cfg.inner, sparsity_t=t)
        beta0 = prev_fit.beta_hat if cfg.warm_start else None
        intercept0 = prev_fit.intercept if cfg.warm_start else 0.0
        try:
            fit = gsdar_fit(family, data, inner, beta0=beta0, intercept0=intercept0)
        except (SingularSystemError, NumericOverflowError) as exc:
            failures.append((t, str(exc)))
            t += cfg.increment_theta
            continue
        points.append(PathPoint(t, fit, hbic(fit, n, p)))
        change = float(np.max(np.abs(fit.beta_hat - prev_fit.beta_hat)))
        prev_fit = fit
        if cfg.nll_below is not None and fit.nll <= cfg.nll_below:
            break
        if cfg.change_below is not None and change <= cfg.change_below:
            break
        t += cfg.increment_theta

    best = min(points, key=lambda pt: (pt.hbic, pt.t))
    return PathResult(
        fits=tuple(points),
        selected_t=best.t,
        selected_fit=best.fit,
        failures=tuple(failures),
    )
