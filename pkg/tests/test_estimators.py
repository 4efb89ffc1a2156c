"""
Testes dos estimadores do ATME e dos baselines convencionais
"""

import numpy as np
import pytest

from src.core.errors import EmptyCellError, SingleLevelModeratorError, UsageError
from src.core.models.dataset import Roles, bind_dataset, split_by_treatment
from src.core.models.dgp import DiscreteX
from src.core.models.results import Method, VarianceMode
from src.services.estimators import (
    EstimatorOptions,
    KnownP,
    KnownPi,
    controlled_interaction,
    full_interaction,
    parallel_matching,
    parallel_regression,
    parallel_weighting,
    propensity_weighting,
    registered_methods,
    run_estimators,
    subset_difference,
)
from src.services.numeric import mahalanobis_match
from src.services.simulation import generate, true_propensity
from .conftest import random_dataset


def _swap_moderator(ds):
    return ds.with_labels(s=1 - ds.s)


# ==============================================================================
# BASELINES
# ==============================================================================
def test_subset_difference_on_cell_means(cell_means_data):
    res = subset_difference(cell_means_data)
    assert res.estimate == pytest.approx(2.0, abs=1e-12)
    assert res.diagnostics["cate_s1"] == pytest.approx(3.0)
    assert res.diagnostics["cate_s0"] == pytest.approx(1.0)
    # quatro células de 2 linhas com desvios ±1: s²/n = 2/2 = 1 cada
    assert res.variance == pytest.approx(4.0)


def test_controlled_interaction_is_flagged_biased(make_dataset):
    res = controlled_interaction(make_dataset(n=100, k=1))
    assert res.diagnostics["biased_for_atme"] is True


def test_empty_cell_rejected_by_cell_based_methods():
    ds = bind_dataset(
        {"y": [1.0, 2.0, 3.0, 4.0, 5.0, 6.0], "t": [1, 1, 0, 0, 0, 0], "s": [0, 0, 1, 0, 1, 0]}, Roles("y", "t", "s")
    )
    with pytest.raises(EmptyCellError):
        subset_difference(ds)
    with pytest.raises(SingleLevelModeratorError):
        parallel_regression(ds)


# ==============================================================================
# REGRESSÃO PARALELA E INTERAÇÃO COMPLETA
# ==============================================================================
def test_parallel_regression_without_covariates_is_subset_difference(cell_means_data):
    pr = parallel_regression(cell_means_data)
    assert pr.estimate == pytest.approx(subset_difference(cell_means_data).estimate, abs=1e-12)


def test_parallel_regression_components_add_up(make_dataset):
    res = parallel_regression(make_dataset(n=300, k=2))
    sc = res.subset_components
    assert res.estimate == pytest.approx(sc.gamma1 - sc.gamma0, abs=1e-12)
    assert res.variance == pytest.approx(sc.var0 + sc.var1, rel=1e-12)
    assert res.ci_lower < res.estimate < res.ci_upper


@pytest.mark.parametrize("n_datasets", [40])
def test_full_interaction_equals_parallel_regression(rng, n_datasets):
    """Identidade algébrica: o coeficiente de T·S com T·X é o γ̂₁ − γ̂₀"""
    for _ in range(n_datasets):
        ds = random_dataset(rng, int(rng.integers(50, 501)), int(rng.integers(0, 5)))
        fr = full_interaction(ds).estimate
        pr = parallel_regression(ds).estimate
        assert abs(fr - pr) / max(1.0, abs(pr)) <= 1e-8


@pytest.mark.slow
def test_full_interaction_identity_full_budget(rng):
    test_full_interaction_equals_parallel_regression(rng, 200)


def test_parallel_regression_recovers_delta(baseline_data):
    res = parallel_regression(baseline_data)
    assert abs(res.estimate - 2.0) < 4.0 * res.std_error


def test_cluster_robust_requires_labels(make_dataset):
    options = EstimatorOptions(variance_mode=VarianceMode.CLUSTER_ROBUST)
    with pytest.raises(UsageError):
        parallel_regression(make_dataset(n=60, k=1), options)


def test_cluster_labels_default_to_cluster_variance(make_dataset):
    res = parallel_regression(make_dataset(n=120, k=1, clusters=True))
    assert res.diagnostics["variance_mode"] == VarianceMode.CLUSTER_ROBUST.value


# ==============================================================================
# PONDERAÇÃO
# ==============================================================================
def test_propensity_weighting_hand_example():
    """Y=(5,2,3,1), p=π=1/2: termos (20, −8, −12, 4), média 1"""
    ds = bind_dataset({"y": [5.0, 2.0, 3.0, 1.0], "t": [1, 1, 0, 0], "s": [1, 0, 1, 0]}, Roles("y", "t", "s"))
    options = EstimatorOptions(p_spec=KnownP(0.5), pi_spec=KnownPi(lambda x: np.full(x.shape[0], 0.5)))
    res = propensity_weighting(ds, options)
    assert res.estimate == pytest.approx(1.0, abs=1e-12)
    assert res.diagnostics["p_source"] == "known"


def test_propensity_weighting_with_true_propensity(baseline_dgp, baseline_data):
    options = EstimatorOptions(p_spec=KnownP(0.5), pi_spec=KnownPi(true_propensity(baseline_dgp)))
    res = propensity_weighting(baseline_data, options)
    assert abs(res.estimate - 2.0) < 4.0 * res.std_error


def test_parallel_weighting_runs_per_subset(baseline_data):
    res = parallel_weighting(baseline_data)
    assert res.subset_components is not None
    assert set(res.diagnostics["propensity"]) == {"T0", "T1"}
    assert abs(res.estimate - 2.0) < 4.0 * res.std_error


# ==============================================================================
# PAREAMENTO
# ==============================================================================
def test_parallel_matching_uses_within_subset_pairs(make_dataset):
    ds = make_dataset(n=200, k=2)
    res = parallel_matching(ds)
    effects = []
    for subset in split_by_treatment(ds):
        match = mahalanobis_match(subset.x, subset.s)
        effects.append(np.mean(subset.y[match.target_indices] - subset.y[match.matched_indices]))
    assert res.estimate == pytest.approx(effects[1] - effects[0], abs=1e-12)
    assert res.diagnostics["balance"]["matched"] is True


def test_parallel_matching_bootstrap_is_seeded(make_dataset):
    ds = make_dataset(n=120, k=1)
    options = EstimatorOptions(bootstrap_reps=30, seed=5)
    a = parallel_matching(ds, options)
    b = parallel_matching(ds, options)
    assert a.variance == b.variance
    assert a.diagnostics["variance_method"] == "bootstrap"


# ==============================================================================
# PROPRIEDADES GERAIS
# ==============================================================================
@pytest.mark.parametrize(
    "estimator",
    [subset_difference, controlled_interaction, parallel_regression, full_interaction, propensity_weighting, parallel_weighting],
)
def test_moderator_label_swap_negates_estimate(make_dataset, estimator):
    ds = make_dataset(n=300, k=2)
    original = estimator(ds).estimate
    swapped = estimator(_swap_moderator(ds)).estimate
    assert swapped == pytest.approx(-original, abs=1e-6 * max(1.0, abs(original)))


def test_every_method_is_registered():
    assert set(registered_methods()) == set(Method)


def test_run_estimators_keeps_requested_order(make_dataset):
    ds = make_dataset(n=200, k=1)
    methods = [Method.FULL_INTERACTION, Method.SUBSET_DIFFERENCE, Method.PARALLEL_REGRESSION]
    results = run_estimators(ds, methods)
    assert [r.method for r in results] == methods


@pytest.mark.parametrize(
    "estimator",
    [
        subset_difference,
        controlled_interaction,
        parallel_regression,
        full_interaction,
        propensity_weighting,
        parallel_weighting,
        parallel_matching,
    ],
)
def test_treatment_label_swap_negates_estimate(make_dataset, estimator):
    ds = make_dataset(n=300, k=2)
    original = estimator(ds).estimate
    swapped = estimator(ds.with_labels(t=1 - ds.t)).estimate
    assert swapped == pytest.approx(-original, abs=1e-8 * max(1.0, abs(original)))


# ==============================================================================
# CÉLULAS COM UMA ÚNICA LINHA
# ==============================================================================
@pytest.fixture
def singleton_cells():
    """Uma linha por célula (T,S): Y=(5,2,3,1) dá diferença das diferenças (5−2) − (3−1) = 1"""
    return bind_dataset({"y": [5.0, 2.0, 3.0, 1.0], "t": [1, 0, 1, 0], "s": [1, 1, 0, 0]}, Roles("y", "t", "s"))


@pytest.mark.parametrize("estimator", [subset_difference, controlled_interaction, parallel_regression, full_interaction])
def test_singleton_cells_keep_point_estimate(singleton_cells, estimator):
    res = estimator(singleton_cells)
    assert res.estimate == pytest.approx(1.0, abs=1e-10)
    assert not res.variance_defined
    assert np.isnan(res.std_error) and np.isnan(res.ci_lower) and np.isnan(res.ci_upper)
    assert res.diagnostics["variance_defined"] is False
    assert not res.covers(1.0)


def test_single_moderated_unit_per_arm_in_matching():
    columns = {
        "y": [5.0, 2.0, 7.0, 9.0, 4.0, 0.0, 3.0, 8.0],
        "t": [1, 1, 1, 1, 0, 0, 0, 0],
        "s": [1, 0, 0, 0, 1, 0, 0, 0],
        "x": [0.0, 0.1, 1.0, 2.0, 1.0, 0.0, 1.2, 3.0],
    }
    res = parallel_matching(bind_dataset(columns, Roles("y", "t", "s", ("x",))))
    # T=1: 5 − 2 = 3; T=0: 4 − 3 = 1
    assert res.estimate == pytest.approx(2.0, abs=1e-12)
    assert not res.variance_defined


def test_exact_matches_on_discrete_covariate_balance_perfectly(baseline_dgp):
    cfg = baseline_dgp.model_copy(
        update={"n": 600, "seed": 5, "x_model": DiscreteX(levels=(-1.0, 0.0, 1.0), probs=(0.25, 0.5, 0.25))}
    )
    res = parallel_matching(generate(cfg))
    rows = res.diagnostics["balance"]["covariates"]
    assert rows and all(r["smd_after"] == 0.0 for r in rows)
    assert all(m["ridge"] == 0.0 for m in res.diagnostics["matching"].values())


@pytest.mark.parametrize("estimator", [propensity_weighting, parallel_weighting])
def test_weighting_survives_high_leverage_covariate(leverage_dataset, estimator):
    res = estimator(leverage_dataset)
    assert np.isfinite(res.estimate)
    assert res.variance_defined
