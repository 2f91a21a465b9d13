"""GLM building blocks: losses, derivatives, and input validation."""

import math

import numpy as np
import pytest

import sdar_glm as sg
from sdar_glm.rng import make_rng

from helpers import gaussian_instance, logistic_instance


# --- cumulant / mean / variance -------------------------------------------

def test_logistic_cumulant_at_zero_is_log_two():
    assert sg.LOGISTIC.cumulant(np.array([0.0]))[0] == pytest.approx(math.log(2.0), abs=1e-15)


def test_logistic_cumulant_is_overflow_safe():
    theta = np.array([-800.0, -700.0, 700.0, 800.0])
    c = sg.LOGISTIC.cumulant(theta)
    assert np.all(np.isfinite(c))
    # log(1 + e^t) -> t for large t and -> 0 for very negative t
    assert c[3] == 800.0
    assert c[0] == 0.0


def test_logistic_mean_at_one_is_sigmoid_of_one():
    # e / (1 + e), written out so the expected value is independent arithmetic
    e = math.e
    assert sg.LOGISTIC.mean(np.array([1.0]))[0] == pytest.approx(e / (1.0 + e), abs=1e-15)


@pytest.mark.parametrize("family", [sg.LOGISTIC, sg.GAUSSIAN])
def test_cumulant_derivative_is_mean(family):
    theta = np.linspace(-6.0, 6.0, 41)
    h = 1e-6
    fd = (family.cumulant(theta + h) - family.cumulant(theta - h)) / (2.0 * h)
    assert np.allclose(fd, family.mean(theta), atol=1e-8)


@pytest.mark.parametrize("family", [sg.LOGISTIC, sg.GAUSSIAN])
def test_mean_derivative_is_variance(family):
    theta = np.linspace(-6.0, 6.0, 41)
    h = 1e-6
    fd = (family.mean(theta + h) - family.mean(theta - h)) / (2.0 * h)
    assert np.allclose(fd, family.variance(theta), atol=1e-8)


@pytest.mark.parametrize("family", [sg.LOGISTIC, sg.GAUSSIAN])
def test_cumulant_is_midpoint_convex(family):
    theta = np.linspace(-30.0, 30.0, 201)
    a, b = theta[:-1], theta[1:]
    mid = family.cumulant((a + b) / 2.0)
    assert np.all(mid <= (family.cumulant(a) + family.cumulant(b)) / 2.0 + 1e-12)


@pytest.mark.parametrize("family", [sg.LOGISTIC, sg.GAUSSIAN])
def test_variance_is_nonnegative(family):
    theta = np.linspace(-50.0, 50.0, 101)
    assert np.all(family.variance(theta) >= 0.0)


def test_get_family_is_case_insensitive():
    assert sg.get_family("logistic") is sg.LOGISTIC
    assert sg.get_family("GAUSSIAN") is sg.GAUSSIAN


def test_get_family_rejects_unknown_names():
    with pytest.raises(ValueError, match="unknown family"):
        sg.get_family("poisson")


def test_logistic_check_response_lists_offenders():
    sg.LOGISTIC.check_response(np.array([0.0, 1.0, 1.0]))  # no raise
    with pytest.raises(ValueError, match=r"0, 1"):
        sg.LOGISTIC.check_response(np.array([0.0, 2.0, 0.5]))


def test_gaussian_check_response_accepts_any_finite_values():
    sg.GAUSSIAN.check_response(np.array([-3.5, 0.0, 17.2]))


# --- Dataset ----------------------------------------------------------------

def test_dataset_normalizes_and_exposes_shape():
    data = sg.Dataset([[1, 2], [3, 4], [5, 6]], [1, 0, 1])
    assert (data.n, data.p) == (3, 2)
    assert data.X.dtype == float and data.y.dtype == float


def test_dataset_allows_zero_rows():
    data = sg.Dataset(np.zeros((0, 3)), np.zeros(0))
    assert (data.n, data.p) == (0, 3)


@pytest.mark.parametrize(
    "X, y, message",
    [
        (np.zeros(4), np.zeros(4), "2-d"),
        (np.zeros((3, 0)), np.zeros(3), "at least one column"),
        (np.zeros((3, 2)), np.zeros(4), "rows but y has"),
        (np.array([[np.inf, 0.0]]), np.zeros(1), "X contains non-finite"),
        (np.zeros((2, 2)), np.array([0.0, np.nan]), "y contains non-finite"),
    ],
)
def test_dataset_rejects_malformed_inputs(X, y, message):
    with pytest.raises(ValueError, match=message):
        sg.Dataset(X, y)


def test_dataset_rejects_wrong_feature_name_count():
    with pytest.raises(ValueError, match="feature_names"):
        sg.Dataset(np.zeros((2, 3)), np.zeros(2), feature_names=("a", "b"))


# --- linear predictor and loss ----------------------------------------------

def test_linear_predictor_overflow_names_first_bad_row():
    data = sg.Dataset(np.array([[1.0], [1e308]]), np.array([0.0, 1.0]))
    with pytest.raises(sg.NumericOverflowError, match="observation 1") as err:
        sg.linear_predictor(data, np.array([10.0]))
    assert err.value.row == 1


def test_logistic_nll_matches_probability_form():
    # independent algebra: -mean(y log p + (1-y) log(1-p)) with p = sigmoid
    data = sg.Dataset(np.array([[1.0], [2.0]]), np.array([1.0, 0.0]))
    value = sg.negative_log_likelihood(sg.LOGISTIC, data, np.array([0.5]))
    assert value == pytest.approx(0.8936693358491647, abs=1e-15)


def test_logistic_nll_at_zero_is_log_two():
    data, _, _ = logistic_instance(3, 50, 6, 2)
    value = sg.negative_log_likelihood(sg.LOGISTIC, data, np.zeros(6))
    assert value == pytest.approx(math.log(2.0), abs=1e-14)


def test_gaussian_nll_is_half_mean_squared_residual():
    data, beta, _ = gaussian_instance(7, 40, 5, 2)
    b = beta * 0.9
    expected = float(np.sum((data.y - data.X @ b) ** 2)) / (2.0 * data.n)
    assert sg.negative_log_likelihood(sg.GAUSSIAN, data, b) == pytest.approx(expected, rel=1e-12)


def test_nll_stays_finite_at_saturating_predictors():
    data = sg.Dataset(np.array([[700.0], [-700.0]]), np.array([1.0, 0.0]))
    value = sg.negative_log_likelihood(sg.LOGISTIC, data, np.array([1.0]))
    assert math.isfinite(value) and value >= 0.0


# --- gradient and Hessian against finite differences ------------------------

@pytest.mark.parametrize("family_name, build", [
    ("logistic", logistic_instance),
    ("gaussian", gaussian_instance),
])
def test_gradient_matches_central_differences(family_name, build):
    family = sg.get_family(family_name)
    data, beta, _ = build(11, 60, 8, 3)
    point = beta * 0.5 + 0.01
    g = sg.gradient(family, data, point)
    fd = sg.finite_difference_gradient(family, data, point)
    rel = np.linalg.norm(g - fd) / max(np.linalg.norm(fd), 1e-12)
    assert rel <= 1e-5


@pytest.mark.parametrize("family_name, build", [
    ("logistic", logistic_instance),
    ("gaussian", gaussian_instance),
])
def test_hessian_matches_differenced_gradient(family_name, build):
    family = sg.get_family(family_name)
    data, beta, _ = build(13, 60, 8, 3)
    point = beta * 0.5 + 0.01
    active = np.array([0, 2, 5])
    H = sg.hessian_active(family, data, point, active)
    h = 1e-6
    fd = np.zeros((3, 3))
    for col, j in enumerate(active):
        up, down = point.copy(), point.copy()
        up[j] += h
        down[j] -= h
        diff = sg.gradient(family, data, up) - sg.gradient(family, data, down)
        fd[:, col] = diff[active] / (2.0 * h)
    rel = np.linalg.norm(H - fd) / max(np.linalg.norm(fd), 1e-12)
    assert rel <= 1e-4


def test_hessian_is_exactly_symmetric_and_psd():
    data, beta, _ = logistic_instance(17, 80, 12, 3)
    active = np.array([1, 3, 4, 9])
    H = sg.hessian_active(sg.LOGISTIC, data, beta, active)
    assert np.array_equal(H, H.T)
    assert np.min(np.linalg.eigvalsh(H)) >= -1e-12


def test_hessian_equals_dense_weighted_product():
    data, beta, _ = logistic_instance(19, 50, 7, 2)
    active = np.array([0, 3, 6])
    w = sg.LOGISTIC.variance(data.X @ beta)
    Xa = data.X[:, active]
    dense = Xa.T @ (w[:, None] * Xa) / data.n
    H = sg.hessian_active(sg.LOGISTIC, data, beta, active)
    assert np.allclose(H, dense, atol=1e-14)


def test_hessian_rejects_empty_active_set():
    data, _, _ = gaussian_instance(23, 20, 4, 1)
    with pytest.raises(ValueError, match="nonempty"):
        sg.hessian_active(sg.GAUSSIAN, data, np.zeros(4), np.empty(0, dtype=int))


def test_gradient_is_zero_at_gaussian_least_squares_solution():
    data, _, _ = gaussian_instance(29, 50, 5, 2)
    full, *_ = np.linalg.lstsq(data.X, data.y, rcond=None)
    g = sg.gradient(sg.GAUSSIAN, data, full)
    assert np.max(np.abs(g)) <= 1e-10
