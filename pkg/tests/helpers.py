"""Shared instance builders for the test suite.

All randomness flows through keyed Philox streams, so every instance is a
pure function of its seed: stream 0 feeds the design, 1 the coefficients,
2 the responses.
"""

import math

import numpy as np

import sdar_glm as sg
from sdar_glm.rng import make_rng


def detectable_magnitude(n: int, p: int) -> float:
    """Coefficient scale 5 * sqrt(2 log(p) / n) at which supports separate
    cleanly from noise."""
    return 5.0 * math.sqrt(2.0 * math.log(p) / n)


def logistic_instance(seed: int, n: int, p: int, k: int):
    """Bernoulli responses on an i.i.d. Gaussian design with a strong,
    randomly signed, size-k signal.  Returns (data, beta_star, support)."""
    X = make_rng(seed, 0).standard_normal((n, p))
    m1 = detectable_magnitude(n, p)
    beta, support = sg.gen_coefficients(p, k, m1, 2.0 * m1, make_rng(seed, 1))
    y = sg.gen_bernoulli_responses(X, beta, make_rng(seed, 2))
    return sg.Dataset(X, y), beta, support


def gaussian_instance(seed: int, n: int, p: int, k: int, noise: float = 1.0):
    """Unit-noise linear responses on an i.i.d. Gaussian design with a
    strong, randomly signed, size-k signal.  Returns (data, beta_star,
    support)."""
    X = make_rng(seed, 0).standard_normal((n, p))
    m1 = detectable_magnitude(n, p)
    beta, support = sg.gen_coefficients(p, k, m1, 2.0 * m1, make_rng(seed, 1))
    y = X @ beta + noise * make_rng(seed, 2).standard_normal(n)
    return sg.Dataset(X, y), beta, support


def orthogonal_design(seed: int, n: int, p: int) -> np.ndarray:
    """n x p design with exactly orthogonal columns of length sqrt(n)."""
    if p > n:
        raise ValueError("orthogonal columns need p <= n")
    raw = make_rng(seed, 0).standard_normal((n, p))
    q, _ = np.linalg.qr(raw)
    return q * math.sqrt(n)
