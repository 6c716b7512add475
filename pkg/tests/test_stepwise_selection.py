import time

import numpy as np
import pytest
from pydantic import ValidationError
from scipy import stats

from errors import DegenerateFitError, DomainError
from regression_engine import Dataset, init_state, scan_candidates
from schemas import PvalueConfig, SelectionGroup, SelectionGroupList
from stepwise_selection import (
    averaged_fit_misclassification,
    classify,
    label_set,
    misclassification_count,
    repeated_stepwise,
    step_pvalue,
    stepwise,
)
from table_io import read_table


def test_signal_columns_come_first(signal_data):
    path = stepwise(signal_data, PvalueConfig(alpha=0.05))
    assert path.columns[:2] == [3, 10]
    assert path.steps[0].index == 4
    assert path.steps[0].pvalue < 1e-10
    assert all(step.pvalue <= 0.05 for step in path.steps)


def test_first_step_pvalue_replays(signal_data):
    path = stepwise(signal_data, PvalueConfig(alpha=1.0, kmax=1))
    state = init_state(signal_data)
    j, ss_best = scan_candidates(state)
    assert path.columns == [j]
    replay = step_pvalue(ss_best, state.ss0, signal_data.n, 0, PvalueConfig(), signal_data.k)
    assert path.steps[0].pvalue == pytest.approx(replay, rel=1e-12)


def test_first_step_pvalue_closed_form(noise_data):
    path = stepwise(noise_data, PvalueConfig(alpha=1.0, kmax=1))
    ss0 = path.ss0
    rss = path.steps[0].rss
    sf = stats.beta.sf(1 - rss / ss0, 0.5, (noise_data.n - 1) / 2)
    assert path.steps[0].pvalue == pytest.approx(1 - (1 - sf) ** noise_data.k, rel=1e-8)


def test_step_pvalue_needs_positive_rss():
    with pytest.raises(DegenerateFitError):
        step_pvalue(0.0, 0.0, 10, 0, PvalueConfig(), 5)
    with pytest.raises(DomainError):
        step_pvalue(2.0, 1.0, 10, 0, PvalueConfig(), 5)
    with pytest.raises(DomainError):
        step_pvalue(0.5, 1.0, 10, 0, PvalueConfig())


def test_alpha_zero_selects_nothing(signal_data):
    assert stepwise(signal_data, PvalueConfig(alpha=0.0)).steps == []


def test_alpha_one_runs_to_kmax(signal_data):
    path = stepwise(signal_data, PvalueConfig(alpha=1.0, kmax=6))
    assert len(path.steps) == 6
    rss = [step.rss for step in path.steps]
    assert all(a >= b for a, b in zip(rss, rss[1:]))


def test_kmax_is_capped_by_sample_size(rng):
    data = Dataset(rng.standard_normal(6), rng.standard_normal((6, 20)))
    assert len(stepwise(data, PvalueConfig(alpha=1.0)).steps) <= 4


def test_excluded_columns_are_never_chosen(signal_data):
    path = stepwise(signal_data, PvalueConfig(alpha=0.05), excluded={3})
    assert 3 not in path.columns
    assert 10 in path.columns


def test_nu_above_remaining_covariates_stops(noise_data):
    assert stepwise(noise_data, PvalueConfig(alpha=1.0, nu=20)).steps == []


def test_nu_cannot_exceed_ek():
    with pytest.raises(ValidationError):
        PvalueConfig(nu=5, ek=3)


def test_larger_nu_gives_smaller_pvalues(signal_data):
    p1 = stepwise(signal_data, PvalueConfig(alpha=1.0, kmax=3)).steps
    p5 = stepwise(signal_data, PvalueConfig(alpha=1.0, kmax=3, nu=5)).steps
    assert [s.column for s in p1] == [s.column for s in p5]
    assert all(b.pvalue <= a.pvalue for a, b in zip(p1, p5))


def test_pure_noise_first_step_is_uniform():
    grid = np.random.default_rng(99)
    pvalues = []
    for _ in range(2000):
        data = Dataset(grid.standard_normal(50), grid.standard_normal((50, 20)))
        pvalues.append(stepwise(data, PvalueConfig(alpha=1.0, kmax=1)).steps[0].pvalue)
    assert stats.kstest(pvalues, "uniform").pvalue > 0.01


def test_pure_noise_false_positive_rate():
    grid = np.random.default_rng(5)
    hits = 0
    for _ in range(2000):
        data = Dataset(grid.standard_normal(50), grid.standard_normal((50, 20)))
        hits += bool(stepwise(data, PvalueConfig(alpha=0.05)).steps)
    assert hits / 2000 <= 0.05 + 3 * np.sqrt(0.05 / 2000)


def test_misclass_is_recorded(label_data):
    path = stepwise(label_data, PvalueConfig(alpha=0.05, misclass=True))
    assert path.columns[0] == 0
    assert all(step.misclass is not None for step in path.steps)
    assert path.steps[0].misclass == misclassification_count(label_data, [0])


def test_repeated_groups_are_disjoint(signal_data):
    result = repeated_stepwise(signal_data, PvalueConfig(alpha=0.5, kmax=3), nmax=4)
    columns = [c for group in result.groups for c in group.columns]
    assert len(columns) == len(set(columns))
    assert [g.group_id for g in result.groups] == list(range(1, len(result.groups) + 1))
    assert result.total_covariates == len(columns)


def test_repeated_first_group_equals_stepwise(signal_data):
    cfg = PvalueConfig(alpha=0.05)
    single = stepwise(signal_data, cfg)
    repeated = repeated_stepwise(signal_data, cfg, nmax=1)
    assert repeated.groups[0].columns == single.columns
    assert [s.pvalue for s in repeated.groups[0].steps] == [s.pvalue for s in single.steps]


def test_repeated_respects_vmax(signal_data):
    result = repeated_stepwise(signal_data, PvalueConfig(alpha=1.0, kmax=4), vmax=7)
    assert result.total_covariates == 7


def test_repeated_default_vmax_is_kmax_times_nmax(signal_data):
    result = repeated_stepwise(signal_data, PvalueConfig(alpha=1.0, kmax=2), nmax=3)
    assert result.total_covariates == 6
    assert len(result.groups) == 3


def test_classify_breaks_ties_downwards():
    labels = np.array([0.0, 1.0, 2.0])
    np.testing.assert_array_equal(classify([0.5, 0.49, 0.51, 1.7, -3.0, 9.0], labels), [0, 0, 1, 2, 0, 2])


def test_label_set_needs_integers():
    np.testing.assert_array_equal(label_set([2.0, 0.0, 2.0, 1.0]), [0.0, 1.0, 2.0])
    with pytest.raises(DomainError):
        label_set([0.5, 1.0])


def test_exact_fit_has_no_misclassifications(rng):
    y = rng.integers(0, 3, 30).astype(float)
    X = np.column_stack([y, rng.standard_normal(30)])
    assert misclassification_count(Dataset(y, X), [0]) == 0


def test_averaged_fit_misclassification(rng):
    y = rng.integers(0, 2, 40).astype(float)
    X = np.column_stack([y, 2 * y + 1, rng.standard_normal(40)])
    data = Dataset(y, X)
    groups = SelectionGroupList(
        groups=[
            SelectionGroup(group_id=1, steps=stepwise(data, PvalueConfig(alpha=1.0, kmax=1)).steps),
            SelectionGroup(group_id=2, steps=stepwise(data, PvalueConfig(alpha=1.0, kmax=1), excluded={0}).steps),
        ]
    )
    assert averaged_fit_misclassification(data, groups) == 0
    with pytest.raises(DomainError):
        averaged_fit_misclassification(data, SelectionGroupList())


def test_leukemia_selection(leukemia_csv):
    data = read_table(leukemia_csv)
    path = stepwise(data, PvalueConfig(alpha=0.05, kmax=10, misclass=True))
    assert [s.index for s in path.steps] == [1182, 1219, 2888]
    assert [s.misclass for s in path.steps] == [4, 3, 1]
    assert path.steps[1].pvalue == pytest.approx(8.577131e-4, rel=1e-4)
    assert path.steps[2].pvalue == pytest.approx(3.5805523e-3, rel=1e-4)
    assert [s.rss for s in path.steps] == pytest.approx([4.256962, 2.884064, 2.023725], rel=1e-6)


def test_colon_repeated(colon_csv):
    data = read_table(colon_csv)
    result = repeated_stepwise(data, PvalueConfig(alpha=0.05))
    assert result.groups[0].steps[0].index == 493
    assert result.groups[0].steps[0].pvalue == pytest.approx(7.40e-8, rel=1e-2)
    assert (result.total_covariates, len(result.groups)) == (82, 49)
    assert averaged_fit_misclassification(data, result) == 5


def test_empty_subset_misclassifies_the_minority_class(rng):
    y = np.array([0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0])
    assert misclassification_count(Dataset(y, rng.standard_normal((7, 2))), []) == 2


def test_leukemia_shaped_selection_is_fast(rng):
    X = rng.standard_normal((72, 3571))
    y = X[:, 10] - X[:, 200] + X[:, 3000] + 0.2 * rng.standard_normal(72)
    start = time.perf_counter()
    path = stepwise(Dataset(y, X), PvalueConfig(alpha=1.0, kmax=3))
    assert time.perf_counter() - start < 1.0
    assert len(path.steps) == 3


@pytest.mark.slow
def test_wide_selection_with_large_nu_is_fast(rng):
    X = rng.standard_normal((1000, 1000))
    y = rng.standard_normal(1000)
    start = time.perf_counter()
    stepwise(Dataset(y, X), PvalueConfig(alpha=0.05, nu=10))
    assert time.perf_counter() - start < 5.0
