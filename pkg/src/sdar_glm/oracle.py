"""Brute-force references for validating the solver on small instances.

Nothing here is fast; everything is simple enough to audit by eye.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace

import numpy as np

from .families import Dataset, GlmFamily, negative_log_likelihood
from .solver import SdarConfig, restricted_mle

__all__ = ["OracleResult", "best_subset_exhaustive", "finite_difference_gradient"]

_BUDGET = 10**6


@dataclass(frozen=True)
class OracleResult:
    support: np.ndarray
    beta: np.ndarray
    nll: float


def best_subset_exhaustive(
    family: GlmFamily,
    data: Dataset,
    t: int,
    exact_size: bool = True,
    cfg: SdarConfig | None = None,
) -> OracleResult:
    """Globally best support by enumeration.

    Tries every support of size t (or of size <= t, including the empty
    model, when exact_size is False), solving each restricted problem to
    gradient tolerance 1e-10, and returns the smallest NLL.  Ties go to the
    lexicographically smallest support (the enumeration order).  Refuses
    instances with more than 10**6 candidate supports.
    """
    p = data.p
    if not 0 <= t <= p:
        raise ValueError(f"t must lie in [0, {p}], got {t}")
    sizes = [t] if exact_size else list(range(t + 1))
    n_candidates = sum(math.comb(p, s) for s in sizes)
    if n_candidates > _BUDGET:
        raise ValueError(
            f"{n_candidates} candidate supports exceed the enumeration budget {_BUDGET}"
        )
    base = cfg if cfg is not None else SdarConfig(sparsity_t=max(t, 1))
    solve_cfg = replace(base, newton_grad_tol=1e-10, newton_max_iters=200)

    best: OracleResult | None = None
    for size in sizes:
        for supp in itertools.combinations(range(p), size):
            beta = np.zeros(p)
            if size:
                idx = np.asarray(supp, dtype=int)
                beta[idx] = restricted_mle(family, data, idx, np.zeros(size), solve_cfg)
            nll = negative_log_likelihood(family, data, beta)
            if best is None or nll < best.nll:
                best = OracleResult(np.asarray(supp, dtype=int), beta, nll)
    return best


def finite_difference_gradient(
    family: GlmFamily, data: Dataset, beta: np.ndarray, h: float = 1e-6
) -> np.ndarray:
    """Central-difference gradient of the NLL, one coordinate at a time."""
    beta = np.asarray(beta, dtype=float)
    out = np.zeros_like(beta)
    for j in range(beta.size):
        up = beta.copy()
        down = beta.copy()
        up[j] += h
        down[j] -= h
        out[j] = (
            negative_log_likelihood(family, data, up)
            - negative_log_likelihood(family, data, down)
        ) / (2.0 * h)
    return out
