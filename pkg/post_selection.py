"""P-values for covariates chosen by some other method (lasso, knockoff, hand-picked).

Every small subset S of the chosen covariates is scored: member i gets the
probability that the best of k - s + 1 Gaussian covariates does better than i
does on top of S without i. A subset counts only when all its members pass
alpha1; a covariate keeps its smallest P-value over the subsets that count.
"""
import itertools
import logging
from math import comb

import config
from errors import CollinearityError, DomainError
from regression_engine import Dataset, add_covariate, fit_subset, init_state, scan_candidates
from schemas import Companion, PostSelectionResult
from special_functions import BetaParams, beta_cdf, beta_tail_power_sf
from stepwise_selection import misclassification_count

logger = logging.getLogger(__name__)

MAX_SUBSET_SIZE = 3


class _RssCache:
    """RSS of least-squares fits keyed by the sorted column tuple."""

    def __init__(self, data: Dataset, centered: bool):
        self.data = data
        self.centered = centered
        self._rss: dict[tuple[int, ...], float] = {}

    def __call__(self, columns) -> float:
        key = tuple(sorted(columns))
        if key not in self._rss:
            self._rss[key] = fit_subset(self.data, key, self.centered).rss
        return self._rss[key]


def subset_pvalue(ss_subset: float, ss_without: float, n: int, s: int, k: int) -> float:
    """1 - pbeta(pbeta(1 - ss_S/ss_i, 1/2, (n-s-1)/2), k-s+1, 1)."""
    if ss_without <= 0:
        return 1.0
    ratio = min(max(ss_subset / ss_without, 0.0), 1.0)
    sf = beta_cdf(ratio, BetaParams((n - s - 1) / 2, 0.5))
    return beta_tail_power_sf(sf, k - s + 1)


def _validate(data: Dataset, ind, max_size: int) -> list[int]:
    columns = sorted({int(c) for c in ind})
    if not columns:
        raise DomainError("no covariates given")
    for c in columns:
        if not 0 <= c < data.k:
            raise DomainError(f"covariate {c + 1} out of range 1..{data.k}")
    if data.n - max_size - 1 <= 0:
        raise DomainError(f"n={data.n} too small for subsets of size {max_size}")
    n_subsets = sum(comb(len(columns), s) for s in range(1, max_size + 1))
    if n_subsets > config.MAX_SUBSETS:
        raise DomainError(f"{len(columns)} covariates give {n_subsets} subsets, above {config.MAX_SUBSETS}")
    return columns


def _collect(best: dict, members: tuple[int, ...], pvalues: dict[int, float], alpha1: float, augmenter: int | None):
    if any(p >= alpha1 for p in pvalues.values()):
        return
    for i, p in pvalues.items():
        key = (p, len(members), members)
        if i not in best or key < best[i][0]:
            best[i] = (key, members, augmenter)


def _results(data, best, selected, alpha, rss, misclass, centered) -> list[PostSelectionResult]:
    results = []
    for i in sorted(best):
        (p, _, _), members, augmenter = best[i]
        if p >= alpha:
            continue
        companions = [
            Companion(column=c, augmenting=c == augmenter, in_selection=c in selected)
            for c in members
            if c != i
        ]
        results.append(
            PostSelectionResult(
                column=i,
                label=data.labels[i],
                pvalue=p,
                companions=companions,
                rss=rss(members),
                misclass=misclassification_count(data, members, centered) if misclass else None,
                in_selection=i in selected,
            )
        )
    return results


def pval_subsets(
    data: Dataset,
    ind,
    alpha: float = 0.05,
    alpha1: float = 0.05,
    k: int | None = None,
    misclass: bool = False,
    centered: bool = True,
) -> list[PostSelectionResult]:
    """Score every subset of size 1..3 of `ind` (0-based columns); k defaults to data.k."""
    columns = _validate(data, ind, MAX_SUBSET_SIZE)
    k = k or data.k
    rss = _RssCache(data, centered)
    best: dict = {}
    for size in range(1, MAX_SUBSET_SIZE + 1):
        for members in itertools.combinations(columns, size):
            ss_subset = rss(members)
            pvalues = {
                i: subset_pvalue(ss_subset, rss([c for c in members if c != i]), data.n, size, k)
                for i in members
            }
            _collect(best, members, pvalues, alpha1, None)
    results = _results(data, best, set(columns), alpha, rss, misclass, centered)
    logger.info("subset P-values: %d of %d covariates retained", len(results), len(columns))
    return results


def pval_subsets_augmented(
    data: Dataset,
    ind,
    alpha: float = 0.05,
    alpha1: float = 0.05,
    k: int | None = None,
    misclass: bool = False,
    centered: bool = True,
) -> list[PostSelectionResult]:
    """Score S plus the best covariate j over all k columns, for every S of size 0..2 of `ind`."""
    columns = _validate(data, ind, MAX_SUBSET_SIZE)
    k = k or data.k
    selected = set(columns)
    rss = _RssCache(data, centered)
    best: dict = {}
    for size in range(0, MAX_SUBSET_SIZE):
        for subset in itertools.combinations(columns, size):
            state = init_state(data, centered)
            try:
                for c in subset:
                    add_covariate(state, c)
            except CollinearityError:
                logger.warning("skipping collinear subset %s", [c + 1 for c in subset])
                continue
            scan = scan_candidates(state)
            if scan is None:
                continue
            j = scan[0]
            members = subset + (j,)
            s = len(members)
            ss_members = rss(members)
            pvalues = {
                i: subset_pvalue(ss_members, rss([c for c in members if c != i]), data.n, s, k)
                for i in members
            }
            _collect(best, members, pvalues, alpha1, j)
    results = _results(data, best, selected, alpha, rss, misclass, centered)
    logger.info("augmented subset P-values: %d covariates retained", len(results))
    return results
