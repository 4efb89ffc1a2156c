"""
Testes do pareamento de Mahalanobis com reposição
"""

import numpy as np
import pytest

from src.core.errors import MatchingError, UsageError
from src.services.numeric import mahalanobis_match


def _brute_force(features, group):
    vi = np.linalg.inv(np.cov(features, rowvar=False, ddof=1))
    targets = np.flatnonzero(group == 1)
    controls = np.flatnonzero(group == 0)
    matched = []
    for i in targets:
        d = [float((features[i] - features[j]) @ vi @ (features[i] - features[j])) for j in controls]
        matched.append(controls[int(np.argmin(d))])
    return targets, np.array(matched)


def test_matches_brute_force_nearest_neighbor(rng):
    features = rng.normal(size=(40, 3))
    group = (rng.random(40) < 0.4).astype(int)
    group[:2] = [0, 1]
    match = mahalanobis_match(features, group)
    targets, matched = _brute_force(features, group)
    np.testing.assert_array_equal(match.target_indices, targets)
    np.testing.assert_array_equal(match.matched_indices, matched)
    assert match.metadata["metric"] == "mahalanobis"


def test_every_target_matched_to_a_control(rng):
    features = rng.normal(size=(30, 2))
    group = np.array([1, 0] * 15)
    match = mahalanobis_match(features, group)
    assert match.target_indices.size == 15
    assert np.all(group[match.matched_indices] == 0)
    assert sum(match.multiplicities.values()) == 15
    assert np.all(match.distances >= 0.0)


def test_metric_is_invariant_to_feature_scale(rng):
    features = rng.normal(size=(25, 2))
    group = np.array([1, 0, 0, 1, 0] * 5)
    scaled = features * np.array([1000.0, 0.01])
    a = mahalanobis_match(features, group)
    b = mahalanobis_match(scaled, group)
    np.testing.assert_array_equal(a.matched_indices, b.matched_indices)


def test_ties_go_to_lowest_control_index():
    features = np.array([[0.0], [1.0], [-1.0], [5.0]])
    group = np.array([1, 0, 0, 0])
    match = mahalanobis_match(features, group)
    assert match.matched_indices.tolist() == [1]


def test_reuse_is_counted_in_multiplicities():
    features = np.array([[0.0], [0.1], [0.2], [10.0], [0.05]])
    group = np.array([1, 1, 1, 0, 0])
    match = mahalanobis_match(features, group)
    assert match.multiplicities == {4: 3}


def test_constant_features_fall_back_to_identity():
    features = np.ones((4, 2))
    group = np.array([1, 0, 1, 0])
    match = mahalanobis_match(features, group)
    assert match.metadata["metric"] == "identity"
    # todas as distâncias empatadas: menor índice de controle
    assert match.matched_indices.tolist() == [1, 1]


def test_collinear_features_get_ridge(rng):
    z = rng.normal(size=20)
    features = np.column_stack([z, 2.0 * z])
    group = np.array([1, 0] * 10)
    match = mahalanobis_match(features, group)
    assert match.metadata["ridge"] > 0.0


def test_empty_group_and_without_replacement():
    features = np.array([[0.0], [1.0], [2.0]])
    with pytest.raises(MatchingError):
        mahalanobis_match(features, np.array([1, 1, 1]))
    with pytest.raises(UsageError):
        mahalanobis_match(features, np.array([1, 0, 0]), with_replacement=False)


def test_matches_are_invariant_to_affine_maps(rng):
    """Mahalanobis com covariância conjunta: x → Ax + b não muda o pareamento"""
    features = rng.normal(size=(50, 3))
    group = (rng.random(50) < 0.4).astype(int)
    group[:2] = [0, 1]
    a = np.array([[2.0, 0.5, 0.0], [-1.0, 3.0, 0.2], [0.3, 0.0, 0.7]])
    mapped = features @ a.T + np.array([10.0, -4.0, 0.5])
    plain = mahalanobis_match(features, group)
    moved = mahalanobis_match(mapped, group)
    np.testing.assert_array_equal(plain.matched_indices, moved.matched_indices)
    np.testing.assert_allclose(plain.distances, moved.distances, rtol=1e-8)
