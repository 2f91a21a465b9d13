"""L0-constrained GLM solver: support detection plus restricted root finding.

One outer iteration screens the combined primal-dual vector |beta + tau*d|
for its T largest entries (the dual d = -grad L plays the role of a
correlation score on the inactive coordinates), solves the GLM restricted
to the detected coordinates by damped Newton, and recomputes the dual on
the complement.  A fixed point of this map is exactly a hard-threshold
stationary point, so iteration stops as soon as the detected support
repeats.  Revisiting any earlier support (a cycle) or exhausting the
iteration budget also terminates, returning the best iterate seen, which
makes termination unconditional.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy import linalg as sla

from .families import (
    Dataset,
    GlmFamily,
    NumericOverflowError,
    gradient,
    negative_log_likelihood,
)

__all__ = [
    "SingularSystemError",
    "Termination",
    "SdarConfig",
    "SdarState",
    "FitResult",
    "hard_threshold",
    "top_t_support",
    "restricted_mle",
    "gsdar_step",
    "gsdar_fit",
    "kkt_residual",
]


class SingularSystemError(RuntimeError):
    """The restricted Newton system stayed singular after a jitter retry."""

    def __init__(self, active):
        self.active = np.asarray(active, dtype=int)
        super().__init__(
            f"restricted Hessian solve failed on active set {self.active.tolist()}"
        )


class Termination(enum.Enum):
    SUPPORT_STATIONARY = "support_stationary"
    MAX_ITERS = "max_iters"
    CYCLE_DETECTED = "cycle_detected"


@dataclass(frozen=True)
class SdarConfig:
    """Solver knobs.

    sparsity_t is the active-set cardinality T.  step_size_tau in (0, 1]
    scales the dual before support detection; 1 is the plain rule, smaller
    values damp the screening on badly conditioned designs.  coef_cap bounds
    logistic coefficients componentwise so that separable data cannot drive
    the restricted solve to infinity.
    """

    sparsity_t: int
    step_size_tau: float = 1.0
    max_outer_iters: int = 50
    newton_max_iters: int = 50
    newton_grad_tol: float = 1e-8
    ridge_jitter: float = 1e-8
    coef_cap: float = 30.0
    with_intercept: bool = False

    def __post_init__(self):
        if self.sparsity_t < 1:
            raise ValueError(f"sparsity_t must be >= 1, got {self.sparsity_t}")
        if not 0.0 < self.step_size_tau <= 1.0:
            raise ValueError(f"step_size_tau must lie in (0, 1], got {self.step_size_tau}")
        if self.max_outer_iters < 1 or self.newton_max_iters < 1:
            raise ValueError("iteration limits must be >= 1")
        if self.newton_grad_tol <= 0.0:
            raise ValueError("newton_grad_tol must be positive")
        if self.ridge_jitter < 0.0:
            raise ValueError("ridge_jitter must be nonnegative")
        if self.coef_cap <= 0.0:
            raise ValueError("coef_cap must be positive")


@dataclass(frozen=True)
class SdarState:
    """One outer iterate.

    active is the index set the current beta was solved on (empty at
    iteration 0).  For every state with iteration >= 1, beta vanishes off
    the active set and dual vanishes on it, so beta * dual == 0 holds
    coordinatewise.
    """

    beta: np.ndarray
    dual: np.ndarray
    active: np.ndarray
    iteration: int


@dataclass(frozen=True)
class FitResult:
    beta_hat: np.ndarray
    support: np.ndarray
    nll: float
    kkt_residual: float
    iters: int
    termination: Termination
    intercept: float = 0.0


def hard_threshold(v: np.ndarray, lam: float) -> np.ndarray:
    """Zero every entry with |v_i| < sqrt(2*lam); entries at the boundary stay.

    lam = 0 is the identity.
    """
    if lam < 0.0:
        raise ValueError(f"lam must be nonnegative, got {lam}")
    v = np.asarray(v, dtype=float)
    out = v.copy()
    out[np.abs(v) < np.sqrt(2.0 * lam)] = 0.0
    return out


def top_t_support(v: np.ndarray, t: int) -> np.ndarray:
    """Indices of the t largest-magnitude entries, ascending.

    Ties at the t-th magnitude are broken toward smaller index, so the
    result always has exactly t elements.
    """
    v = np.asarray(v, dtype=float)
    if not 1 <= t <= v.size:
        raise ValueError(f"t must lie in [1, {v.size}], got {t}")
    # stable sort on -|v| keeps equal magnitudes in ascending-index order
    order = np.argsort(-np.abs(v), kind="stable")
    return np.sort(order[:t])


def _solve_newton_system(H, g, cfg, active):
    """Solve H step = -g, retrying once with a ridge on failure."""
    try:
        return sla.solve(H, -g, assume_a="pos")
    except np.linalg.LinAlgError:
        pass
    H_jittered = H + cfg.ridge_jitter * np.eye(H.shape[0])
    try:
        return sla.solve(H_jittered, -g, assume_a="pos")
    except np.linalg.LinAlgError:
        raise SingularSystemError(active) from None


def restricted_mle(
    family: GlmFamily,
    data: Dataset,
    active: np.ndarray,
    init: np.ndarray,
    cfg: SdarConfig,
) -> np.ndarray:
    """Minimize the NLL over coordinates in `active` (all others fixed at 0).

    Damped Newton with Armijo backtracking (halving, sufficient-decrease
    1e-4).  Returns as soon as the restricted gradient satisfies
    ||g||_inf <= newton_grad_tol, otherwise the best iterate found within
    newton_max_iters.  For the logistic family every iterate is clipped to
    [-coef_cap, coef_cap] componentwise, which keeps separable data finite.
    A singular Newton system gets one ridge_jitter retry before raising
    SingularSystemError.
    """
    active = np.asarray(active, dtype=int)
    if active.size == 0:
        raise ValueError("active set must be nonempty")
    if active.size > data.n:
        raise ValueError(
            f"active set size {active.size} exceeds the sample size {data.n}"
        )
    Xa = np.ascontiguousarray(data.X[:, active])
    y = data.y
    n = data.n
    d_mean = float(np.mean(family.base_measure(y)))
    cap = cfg.coef_cap if family.name == "logistic" else None

    def theta_of(b):
        theta = Xa @ b
        if not np.all(np.isfinite(theta)):
            raise NumericOverflowError(int(np.flatnonzero(~np.isfinite(theta))[0]))
        return theta

    def value(theta):
        return float(-np.mean(y * theta - family.cumulant(theta)) - d_mean)

    b = np.asarray(init, dtype=float).copy()
    if b.shape != (active.size,):
        raise ValueError(f"init must have shape ({active.size},), got {b.shape}")
    if cap is not None:
        np.clip(b, -cap, cap, out=b)
    fb = value(theta_of(b))
    best_b, best_f = b.copy(), fb

    for _ in range(cfg.newton_max_iters):
        theta = theta_of(b)
        g = Xa.T @ (family.mean(theta) - y) / n
        if np.max(np.abs(g)) <= cfg.newton_grad_tol:
            return b
        w = family.variance(theta)
        M = Xa * np.sqrt(w)[:, None]
        H = M.T @ M / n
        H = 0.5 * (H + H.T)
        step = _solve_newton_system(H, g, cfg, active)
        slope = float(g @ step)
        if slope >= 0.0:
            break  # numerically flat: no descent direction left
        t = 1.0
        accepted = False
        while t >= 2.0**-40:
            cand = b + t * step
            if cap is not None:
                np.clip(cand, -cap, cap, out=cand)
            fc = value(theta_of(cand))
            if fc <= fb + 1e-4 * t * slope:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            break  # the cap or rounding blocked all progress
        b, fb = cand, fc
        if fb < best_f:
            best_f, best_b = fb, b.copy()
    return best_b


def _screen_dim(data: Dataset, cfg: SdarConfig) -> int:
    """Number of screenable coordinates (the intercept column is pinned)."""
    return data.p - 1 if cfg.with_intercept else data.p


def _detect_support(state: SdarState, cfg: SdarConfig, screen_dim: int) -> np.ndarray:
    v = state.beta[:screen_dim] + cfg.step_size_tau * state.dual[:screen_dim]
    return top_t_support(v, cfg.sparsity_t)


def _advance(
    family: GlmFamily,
    data: Dataset,
    state: SdarState,
    support: np.ndarray,
    cfg: SdarConfig,
) -> SdarState:
    """Solve on `support` (plus the pinned intercept column) and refresh the dual."""
    if cfg.with_intercept:
        solve_idx = np.append(support, data.p - 1)
    else:
        solve_idx = support
    beta_active = restricted_mle(family, data, solve_idx, state.beta[solve_idx], cfg)
    beta = np.zeros(data.p)
    beta[solve_idx] = beta_active
    dual = -gradient(family, data, beta)
    dual[solve_idx] = 0.0
    return SdarState(
        beta=beta,
        dual=dual,
        active=np.asarray(support, dtype=int),
        iteration=state.iteration + 1,
    )


def gsdar_step(family: GlmFamily, data: Dataset, state: SdarState, cfg: SdarConfig) -> SdarState:
    """One outer iteration: detect the support, solve on it, refresh the dual.

    With cfg.with_intercept the trailing column of data.X must be the
    all-ones column (gsdar_fit arranges this); it is always solved on and
    never screened.
    """
    support = _detect_support(state, cfg, _screen_dim(data, cfg))
    return _advance(family, data, state, support, cfg)


def _augment_with_ones(data: Dataset) -> Dataset:
    ones = np.ones((data.n, 1))
    return Dataset(np.hstack([data.X, ones]), data.y)


def _initial_state(family: GlmFamily, data: Dataset, beta: np.ndarray) -> SdarState:
    dual = -gradient(family, data, beta)
    return SdarState(beta=beta, dual=dual, active=np.empty(0, dtype=int), iteration=0)


def _kkt_residual_full(
    family: GlmFamily, data: Dataset, beta_full: np.ndarray, t: int, screen_dim: int
) -> float:
    """||beta - H(beta + d)||_inf with the threshold set at the t-th magnitude.

    d = -grad L(beta); the thresholding keeps exactly the solver's top-t
    selection (same tie-break), so a support-stationary solution scores at
    the Newton tolerance level.
    """
    d = -gradient(family, data, beta_full)
    u = beta_full[:screen_dim] + d[:screen_dim]
    sel = top_t_support(u, t)
    h = np.zeros(screen_dim)
    h[sel] = u[sel]
    return float(np.max(np.abs(beta_full[:screen_dim] - h)))


def kkt_residual(family: GlmFamily, data: Dataset, fit: FitResult, t: int) -> float:
    """Stationarity certificate for a fit on `data` (0 means exact fixed point)."""
    if fit.intercept != 0.0:
        work = _augment_with_ones(data)
        beta_full = np.concatenate([fit.beta_hat, [fit.intercept]])
    else:
        work = data
        beta_full = np.asarray(fit.beta_hat, dtype=float)
    return _kkt_residual_full(family, work, beta_full, t, data.p)


def gsdar_fit(
    family: GlmFamily,
    data: Dataset,
    cfg: SdarConfig,
    beta0: np.ndarray | None = None,
    intercept0: float = 0.0,
) -> FitResult:
    """Run outer iterations from beta0 (default 0) until the support settles.

    Termination is unconditional: SUPPORT_STATIONARY when the detected
    support repeats consecutively, CYCLE_DETECTED when an earlier support
    recurs non-consecutively (the visited iterate with smallest NLL is
    returned), MAX_ITERS otherwise (best iterate returned).
    """
    if data.n < 1:
        raise ValueError("data must contain at least one observation")
    family.check_response(data.y)
    t = cfg.sparsity_t
    solve_size = t + (1 if cfg.with_intercept else 0)
    if t > data.p:
        raise ValueError(f"sparsity_t={t} exceeds the number of predictors {data.p}")
    if solve_size > data.n:
        raise ValueError(
            f"restricted solves need sparsity_t{' + intercept' if cfg.with_intercept else ''}"
            f" <= n, got {solve_size} > {data.n}"
        )

    work = _augment_with_ones(data) if cfg.with_intercept else data
    screen_dim = data.p
    beta_init = np.zeros(work.p)
    if beta0 is not None:
        beta0 = np.asarray(beta0, dtype=float)
        if beta0.shape != (data.p,):
            raise ValueError(f"beta0 must have shape ({data.p},), got {beta0.shape}")
        beta_init[: data.p] = beta0
        if cfg.with_intercept:
            beta_init[-1] = float(intercept0)

    state = _initial_state(family, work, beta_init)
    visited: dict[frozenset, SdarState] = {}
    best_state: SdarState | None = None
    best_nll = np.inf
    termination = Termination.MAX_ITERS
    chosen: SdarState | None = None

    for _ in range(cfg.max_outer_iters):
        support = _detect_support(state, cfg, screen_dim)
        if state.iteration > 0 and np.array_equal(support, state.active):
            termination = Termination.SUPPORT_STATIONARY
            chosen = state
            break
        key = frozenset(support.tolist())
        if key in visited:
            termination = Termination.CYCLE_DETECTED
            chosen = best_state
            break
        state = _advance(family, work, state, support, cfg)
        nll = negative_log_likelihood(family, work, state.beta)
        visited[key] = state
        if nll < best_nll:
            best_nll, best_state = nll, state

    if chosen is None:
        chosen = best_state  # MAX_ITERS: iteration budget spent

    beta_full = chosen.beta
    if cfg.with_intercept:
        beta_hat = beta_full[:screen_dim].copy()
        intercept = float(beta_full[screen_dim])
    else:
        beta_hat = beta_full.copy()
        intercept = 0.0
    return FitResult(
        beta_hat=beta_hat,
        support=chosen.active.copy(),
        nll=negative_log_likelihood(family, work, beta_full),
        kkt_residual=_kkt_residual_full(family, work, beta_full, t, screen_dim),
        iters=state.iteration,
        termination=termination,
        intercept=intercept,
    )
