"""
Testes do diagnóstico de suporte comum
"""

import numpy as np
import pytest

from src.core.errors import DataValidationError
from src.core.models.dataset import Roles, bind_dataset
from src.services.support import check_common_support


def test_no_covariates_uses_moderator_share(cell_means_data):
    report = check_common_support(cell_means_data)
    assert report.propensity_range == {0: (0.5, 0.5), 1: (0.5, 0.5)}
    assert not report.empty_cell
    assert report.within_bounds
    assert report.epsilon == 0.01
    assert not report.any_separation


def test_empty_cell_flag_matches_counts():
    ds = bind_dataset({"y": [1.0, 2.0, 3.0, 4.0, 5.0], "t": [1, 1, 0, 0, 0], "s": [0, 0, 1, 0, 1]}, Roles("y", "t", "s"))
    report = check_common_support(ds)
    assert report.empty_cell
    assert report.cell_counts["T1S1"] == 0
    assert not report.within_bounds
    assert any("T1S1" in m for m in report.messages)


def test_separable_covariate_is_flagged_not_fatal():
    x = np.array([-2.0, -1.0, 1.0, 2.0, -1.5, -0.5, 0.5, 1.5])
    columns = {"y": np.arange(8.0), "t": [0, 0, 0, 0, 1, 1, 1, 1], "s": (x > 0).astype(int), "x": x}
    report = check_common_support(bind_dataset(columns, Roles("y", "t", "s", ("x",))))
    assert report.separation == {0: True, 1: True}
    assert report.any_separation


def test_well_supported_data_within_bounds(make_dataset):
    report = check_common_support(make_dataset(n=400, k=1), epsilon=0.001)
    assert report.within_bounds
    for lo, hi in report.propensity_range.values():
        assert 0.001 <= lo <= hi <= 0.999


def test_invalid_epsilon(cell_means_data):
    with pytest.raises(DataValidationError):
        check_common_support(cell_means_data, epsilon=0.7)


def test_high_leverage_point_is_not_flagged_as_separation(leverage_dataset):
    report = check_common_support(leverage_dataset)
    assert report.separation == {0: False, 1: False}
    assert not report.any_separation
    assert all(r is not None for r in report.propensity_range.values())
