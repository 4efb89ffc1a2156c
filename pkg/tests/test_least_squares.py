"""
Testes dos mínimos quadrados por QR e dos três modos de variância
"""

import numpy as np
import pytest

from src.core.errors import InsufficientDataError, RankDeficiencyError, UsageError
from src.core.models.results import VarianceMode
from src.services.numeric import least_squares_fit, mean_variance


def test_exact_fit_recovers_coefficients():
    x = np.array([0.0, 1.0, 2.0, 3.0, 4.0])
    design = np.column_stack([np.ones(5), x])
    fit = least_squares_fit(design, 1.0 + 2.0 * x, column_names=("const", "x"))
    assert fit.coef("const") == pytest.approx(1.0, abs=1e-12)
    assert fit.coef("x") == pytest.approx(2.0, abs=1e-12)
    assert np.allclose(fit.residuals, 0.0, atol=1e-12)


def test_collinear_column_is_named():
    x = np.arange(6.0)
    design = np.column_stack([np.ones(6), x, 2.0 * x])
    with pytest.raises(RankDeficiencyError) as exc:
        least_squares_fit(design, np.arange(6.0), column_names=("const", "x", "x_dup"))
    assert set(exc.value.columns) & {"x", "x_dup"}


@pytest.mark.parametrize("mode", list(VarianceMode))
def test_exact_design_keeps_coefficients_without_variance(mode):
    """n = d: ajuste exato, covariância indefinida"""
    design = np.array([[1.0, 1.0], [1.0, 0.0]])
    clusters = np.array(["a", "b"]) if mode == VarianceMode.CLUSTER_ROBUST else None
    fit = least_squares_fit(design, np.array([5.0, 2.0]), mode, clusters, ("const", "s"))
    assert fit.coef("const") == pytest.approx(2.0, abs=1e-12)
    assert fit.coef("s") == pytest.approx(3.0, abs=1e-12)
    assert not fit.variance_defined
    assert np.isnan(fit.var("s"))


def test_single_observation_mean_has_undefined_variance():
    mean, variance = mean_variance(np.array([3.0]))
    assert mean == pytest.approx(3.0)
    assert np.isnan(variance)


def test_fewer_rows_than_columns():
    with pytest.raises(InsufficientDataError):
        least_squares_fit(np.ones((1, 2)), np.array([3.0]))


def test_cluster_mode_requires_labels():
    with pytest.raises(UsageError):
        least_squares_fit(np.ones((4, 1)), np.arange(4.0), mode=VarianceMode.CLUSTER_ROBUST)


def test_classical_variance_matches_textbook(rng):
    n = 50
    design = np.column_stack([np.ones(n), rng.normal(size=n)])
    y = design @ np.array([0.5, -1.0]) + rng.normal(size=n)
    fit = least_squares_fit(design, y, mode=VarianceMode.CLASSICAL)
    sigma2 = fit.residuals @ fit.residuals / (n - 2)
    expected = sigma2 * np.linalg.inv(design.T @ design)
    np.testing.assert_allclose(fit.covariance, expected, rtol=1e-10)


def test_hc1_variance_matches_sandwich(rng):
    n = 80
    design = np.column_stack([np.ones(n), rng.normal(size=n)])
    y = design @ np.array([1.0, 2.0]) + rng.normal(size=n) * (1 + np.abs(design[:, 1]))
    fit = least_squares_fit(design, y)
    bread = np.linalg.inv(design.T @ design)
    meat = (design * fit.residuals[:, None] ** 2).T @ design
    expected = n / (n - 2) * bread @ meat @ bread
    np.testing.assert_allclose(fit.covariance, expected, rtol=1e-9)
    np.testing.assert_array_equal(fit.covariance, fit.covariance.T)


def test_cluster_variance_with_singleton_clusters_equals_hc1(rng):
    """Com um cluster por linha a correção G/(G−1)·(n−1)/(n−d) reduz a n/(n−d): igual ao HC1"""
    n = 40
    design = np.column_stack([np.ones(n), rng.normal(size=n)])
    y = rng.normal(size=n)
    hc1 = least_squares_fit(design, y)
    cl = least_squares_fit(design, y, mode=VarianceMode.CLUSTER_ROBUST, clusters=np.arange(n))
    np.testing.assert_allclose(cl.covariance, hc1.covariance, rtol=1e-10)
    assert cl.n_clusters == n


def test_mean_variance_hc1_is_s2_over_n():
    values = np.array([1.0, 2.0, 4.0, 7.0])
    mean, var = mean_variance(values)
    assert mean == pytest.approx(3.5)
    assert var == pytest.approx(np.var(values, ddof=1) / 4, rel=1e-12)
