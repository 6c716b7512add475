import numpy as np
import pytest

import config
from errors import DomainError
from post_selection import pval_subsets, pval_subsets_augmented, subset_pvalue
from regression_engine import Dataset, fit_subset
from schemas import Companion, PvalueConfig
from stepwise_selection import step_pvalue


@pytest.fixture
def strong_data(rng):
    """Only column 0 matters."""
    X = rng.standard_normal((60, 15))
    y = 3.0 * X[:, 0] + rng.standard_normal(60)
    return Dataset(y, X)


def test_singleton_matches_stepwise_formula_one_observation_down(signal_data):
    results = pval_subsets(signal_data, [7], alpha=1.0, alpha1=1.0)
    expected = step_pvalue(
        fit_subset(signal_data, [7]).rss, fit_subset(signal_data, []).rss, signal_data.n - 1, 0,
        PvalueConfig(), signal_data.k,
    )
    assert len(results) == 1
    assert results[0].pvalue == pytest.approx(expected, rel=1e-10)
    assert results[0].companions == []


def test_true_covariates_are_retained(signal_data):
    results = pval_subsets(signal_data, [3, 10, 20])
    retained = {r.column for r in results}
    assert {3, 10} <= retained
    for r in results:
        assert r.pvalue < 0.05
        assert r.column not in [c.column for c in r.companions]
        assert len(r.companions) <= 2


def test_results_are_sorted_and_carry_labels(signal_data):
    results = pval_subsets(signal_data, [10, 3], alpha=1.0, alpha1=1.0)
    assert [r.column for r in results] == sorted(r.column for r in results)
    assert all(r.label == signal_data.labels[r.column] for r in results)
    assert all(r.index == r.column + 1 for r in results)


def test_rss_is_that_of_the_reported_subset(signal_data):
    for r in pval_subsets(signal_data, [3, 10, 20], alpha=1.0, alpha1=1.0):
        members = [r.column] + [c.column for c in r.companions]
        assert r.rss == pytest.approx(fit_subset(signal_data, members).rss, rel=1e-12)


def test_misclass_reported_on_request(label_data):
    results = pval_subsets(label_data, [0, 1], alpha=1.0, alpha1=1.0, misclass=True)
    assert results and all(r.misclass is not None for r in results)


def test_subset_pvalue_without_residual_is_one():
    assert subset_pvalue(0.0, 0.0, 20, 2, 10) == 1.0


def test_validation(signal_data, monkeypatch):
    with pytest.raises(DomainError):
        pval_subsets(signal_data, [])
    with pytest.raises(DomainError):
        pval_subsets(signal_data, [signal_data.k])
    monkeypatch.setattr(config, "MAX_SUBSETS", 2)
    with pytest.raises(DomainError):
        pval_subsets(signal_data, [1, 2, 3])


def test_augmented_brings_in_the_best_covariate(strong_data):
    results = pval_subsets_augmented(strong_data, [4, 7])
    outside = [r for r in results if r.column == 0]
    assert outside and not outside[0].in_selection
    assert outside[0].pvalue < 1e-10


def test_augmented_companion_sign(strong_data):
    results = pval_subsets_augmented(strong_data, [0, 4], alpha=1.0, alpha1=1.0)
    for r in results:
        for c in r.companions:
            if c.augmenting and c.in_selection:
                assert c.signed_index == -(c.column + 1)
            else:
                assert c.signed_index == c.column + 1


def test_signed_index():
    assert Companion(column=4, augmenting=True, in_selection=True).signed_index == -5
    assert Companion(column=4, augmenting=True, in_selection=False).signed_index == 5
    assert Companion(column=4).signed_index == 5


def test_alpha1_filters_subsets(strong_data):
    loose = pval_subsets(strong_data, [0, 4, 7], alpha=1.0, alpha1=1.0)
    strict = pval_subsets(strong_data, [0, 4, 7], alpha=1.0, alpha1=1e-6)
    assert {r.column for r in strict} == {0}
    assert len(loose) >= len(strict)


def test_min_over_subsets(strong_data):
    results = {r.column: r for r in pval_subsets(strong_data, [0, 4, 7], alpha=1.0, alpha1=1.0)}
    singleton = pval_subsets(strong_data, [0], alpha=1.0, alpha1=1.0)[0]
    assert results[0].pvalue <= singleton.pvalue
    assert np.isfinite(results[0].rss)
