"""
Testes do DGP estrutural, dos oráculos e do harness de Monte Carlo
"""

import math

import numpy as np
import pytest

from src.core.errors import MonteCarloError
from src.core.models.dgp import ConfounderConfig, DgpConfig, DiscreteX
from src.core.models.results import EstimateResult, Method
from src.services import simulation
from src.services.estimators import EstimatorOptions, KnownP, KnownPi, parallel_regression, run_estimator
from src.services.simulation import (
    brute_force_atme,
    generate,
    moderated_atme,
    monte_carlo,
    oracle_controlled_interaction_bias,
    replication_seed,
    true_atme,
    true_propensity,
)

ORACLE_DRAWS = 200_000


# ==============================================================================
# GERAÇÃO
# ==============================================================================
def test_generate_is_deterministic(baseline_dgp):
    a = generate(baseline_dgp.model_copy(update={"seed": 3}))
    b = generate(baseline_dgp.model_copy(update={"seed": 3}))
    c = generate(baseline_dgp.model_copy(update={"seed": 4}))
    np.testing.assert_array_equal(a.y, b.y)
    np.testing.assert_array_equal(a.s, b.s)
    assert not np.array_equal(a.y, c.y)


def test_generated_columns(baseline_dgp):
    cfg = baseline_dgp.model_copy(update={"noise_covariates": 2, "confounder": ConfounderConfig(alpha=1.0, kappa1=1.0)})
    assert generate(cfg).covariate_names == ("x", "noise1", "noise2")
    assert generate(cfg, reveal_confounder=True).covariate_names == ("x", "noise1", "noise2", "u")


def test_replication_seeds_are_distinct():
    seeds = {replication_seed(7, r) for r in range(1000)}
    assert len(seeds) == 1000
    assert replication_seed(7, 0) == replication_seed(7, 0)


# ==============================================================================
# VERDADE DE POPULAÇÃO
# ==============================================================================
def test_true_atme_is_delta(baseline_dgp):
    assert true_atme(baseline_dgp) == 2.0
    assert brute_force_atme(baseline_dgp) == pytest.approx(2.0, abs=1e-12)
    assert moderated_atme(baseline_dgp) == pytest.approx(2.0, abs=1e-12)


def test_planted_confounder_cancels_in_unit_moderation(baseline_dgp):
    cfg = baseline_dgp.model_copy(update={"confounder": ConfounderConfig(alpha=2.0, kappa0=-1.0, kappa1=1.0)})
    assert brute_force_atme(cfg) == pytest.approx(2.0, abs=1e-12)


def test_true_propensity_without_confounder(baseline_dgp):
    pi = true_propensity(baseline_dgp)
    assert pi(np.array([[0.0]]))[0] == pytest.approx(0.5)


# ==============================================================================
# ORÁCULO
# ==============================================================================
def test_oracle_bias_is_material_at_baseline(baseline_dgp):
    assert abs(oracle_controlled_interaction_bias(baseline_dgp, ORACLE_DRAWS)) > 0.05


def test_oracle_bias_vanishes_without_treatment_by_covariate_term(baseline_dgp):
    cfg = baseline_dgp.model_copy(update={"xi": 0.0})
    assert abs(oracle_controlled_interaction_bias(cfg, ORACLE_DRAWS)) < 1e-8


def test_oracle_bias_vanishes_when_moderator_ignores_covariate(baseline_dgp):
    cfg = baseline_dgp.model_copy(update={"s_model": (0.0, 0.0)})
    assert abs(oracle_controlled_interaction_bias(cfg, ORACLE_DRAWS)) < 0.02


def test_oracle_enumerates_discrete_covariate(baseline_dgp):
    cfg = baseline_dgp.model_copy(
        update={"s_model": (0.0, 0.0), "x_model": DiscreteX(levels=(-1.0, 0.0, 1.0), probs=(0.25, 0.5, 0.25))}
    )
    assert abs(oracle_controlled_interaction_bias(cfg)) < 1e-10


# ==============================================================================
# MONTE CARLO
# ==============================================================================
def _within(summary, target, k=3.0):
    return abs(summary.mean_estimate - target) <= k * summary.mc_se


def test_monte_carlo_separates_biased_and_unbiased(baseline_dgp):
    cfg = baseline_dgp.model_copy(update={"n": 600, "seed": 7})
    report = monte_carlo(
        cfg, 150, [Method.PARALLEL_REGRESSION, Method.CONTROLLED_INTERACTION], threads=2, oracle_draws=ORACLE_DRAWS
    )
    assert _within(report.summary(Method.PARALLEL_REGRESSION), 2.0)
    assert _within(report.summary(Method.CONTROLLED_INTERACTION), 2.0 + report.oracle_bias)
    assert report.oracle_path == "simulation"


def test_monte_carlo_is_independent_of_thread_count(baseline_dgp):
    cfg = baseline_dgp.model_copy(update={"n": 200, "seed": 9})
    methods = [Method.PARALLEL_REGRESSION, Method.SUBSET_DIFFERENCE]
    one = monte_carlo(cfg, 20, methods, threads=1)
    four = monte_carlo(cfg, 20, methods, threads=4)
    assert one.to_dict() == four.to_dict()


def test_failures_are_counted_not_imputed(baseline_dgp):
    cfg = baseline_dgp.model_copy(update={"n": 16, "seed": 1})
    report = monte_carlo(cfg, 40, [Method.PARALLEL_REGRESSION], threads=1)
    s = report.summary(Method.PARALLEL_REGRESSION)
    assert s.reps_ok + s.failures == 40


def test_all_failures_raise(baseline_dgp):
    cfg = baseline_dgp.model_copy(update={"n": 3, "seed": 1})
    with pytest.raises(MonteCarloError):
        monte_carlo(cfg, 5, [Method.FULL_INTERACTION], threads=1)


def test_csv_rows_one_per_estimator(baseline_dgp):
    cfg = baseline_dgp.model_copy(update={"n": 200})
    report = monte_carlo(cfg, 10, [Method.PARALLEL_REGRESSION, Method.SUBSET_DIFFERENCE], threads=1)
    rows = report.csv_rows()
    assert [r["method"] for r in rows] == ["ParallelRegression", "SubsetDifference"]


def test_noise_covariates_do_not_shift_parallel_regression(baseline_dgp):
    ds = generate(baseline_dgp.model_copy(update={"n": 3000, "seed": 21, "noise_covariates": 3}))
    res = parallel_regression(ds)
    assert abs(res.estimate - 2.0) < 4.0 * res.std_error


def test_invalid_or_undefined_variance_counts_as_failure(baseline_dgp, monkeypatch):
    calls = []

    def unreliable(ds, method, options=None):
        res = run_estimator(ds, method, options)
        calls.append(method)
        turn = len(calls) % 3
        if turn == 1:
            return EstimateResult.build(method, res.estimate, math.nan, res.level, res.cell_counts)
        if turn == 2:
            return EstimateResult.build(method, res.estimate, -1.0, res.level, res.cell_counts)
        return res

    monkeypatch.setattr(simulation, "run_estimator", unreliable)
    cfg = baseline_dgp.model_copy(update={"n": 200, "seed": 3})
    report = monte_carlo(cfg, 12, [Method.PARALLEL_REGRESSION], threads=1)
    s = report.summary(Method.PARALLEL_REGRESSION)
    assert (s.reps_ok, s.failures) == (4, 8)
    assert math.isfinite(s.mean_se)


def test_parallel_regression_coverage(baseline_dgp):
    cfg = baseline_dgp.model_copy(update={"n": 400, "seed": 13})
    report = monte_carlo(cfg, 300, [Method.PARALLEL_REGRESSION], threads=2, oracle=False)
    assert 0.88 <= report.summary(Method.PARALLEL_REGRESSION).coverage <= 0.99


def test_parallel_matching_on_discrete_covariate_is_unbiased(baseline_dgp):
    cfg = baseline_dgp.model_copy(
        update={"n": 600, "seed": 19, "x_model": DiscreteX(levels=(-1.0, 0.0, 1.0), probs=(0.25, 0.5, 0.25))}
    )
    report = monte_carlo(cfg, 150, [Method.PARALLEL_MATCHING], threads=2, oracle=False)
    assert _within(report.summary(Method.PARALLEL_MATCHING), moderated_atme(cfg))


# ==============================================================================
# ORÇAMENTO COMPLETO
# ==============================================================================
@pytest.mark.slow
def test_bias_separation_full_budget(baseline_dgp):
    cfg = baseline_dgp.model_copy(update={"n": 1000, "seed": 7})
    report = monte_carlo(cfg, 2000, [Method.PARALLEL_REGRESSION, Method.CONTROLLED_INTERACTION])
    assert _within(report.summary(Method.PARALLEL_REGRESSION), 2.0)
    assert _within(report.summary(Method.CONTROLLED_INTERACTION), 2.0 + report.oracle_bias)
    assert abs(report.oracle_bias) > 0.05


@pytest.mark.slow
@pytest.mark.parametrize("update", [{"xi": 0.0}, {"s_model": (0.0, 0.0)}])
def test_bias_channel_nulls_full_budget(baseline_dgp, update):
    cfg = baseline_dgp.model_copy(update={"n": 1000, "seed": 7, **update})
    report = monte_carlo(cfg, 2000, [Method.CONTROLLED_INTERACTION])
    assert _within(report.summary(Method.CONTROLLED_INTERACTION), 2.0)


@pytest.mark.slow
def test_weighting_with_true_propensity_full_budget(baseline_dgp):
    cfg = baseline_dgp.model_copy(update={"n": 1000, "seed": 7})
    options = EstimatorOptions(p_spec=KnownP(0.5), pi_spec=KnownPi(true_propensity(cfg)))
    report = monte_carlo(cfg, 2000, [Method.PROPENSITY_WEIGHTING], options)
    assert _within(report.summary(Method.PROPENSITY_WEIGHTING), 2.0)


@pytest.mark.slow
def test_parallel_regression_coverage_full_budget(baseline_dgp):
    cfg = baseline_dgp.model_copy(update={"n": 1000, "seed": 7})
    report = monte_carlo(cfg, 2000, [Method.PARALLEL_REGRESSION], oracle=False)
    assert 0.92 <= report.summary(Method.PARALLEL_REGRESSION).coverage <= 0.97
