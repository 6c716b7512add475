"""Gaussian covariate stepwise selection, its repeated variant, and classification helpers."""
import logging
import time

import numpy as np

from errors import DegenerateFitError, DomainError
from regression_engine import Dataset, add_covariate, fit_subset, init_state, scan_candidates
from schemas import PvalueConfig, SelectionGroup, SelectionGroupList, SelectionPath, SelectionStep
from special_functions import BetaParams, beta_cdf, order_statistic_pvalue_sf

logger = logging.getLogger(__name__)

# Below this fraction of ss0 the fit is treated as exact and selection stops.
_PERFECT_FIT = np.finfo(float).eps


def _pvalue(ss_best: float, ss_cur: float, n: int, ell: int, ek: float, nu: float) -> float:
    if ss_cur <= 0:
        raise DegenerateFitError("residual sum of squares is already zero")
    if not 0 <= ss_best <= ss_cur:
        raise DomainError(f"need 0 <= ss_best <= ss_cur, got {ss_best} and {ss_cur}")
    if not 0 <= ell < n - 1:
        raise DomainError(f"ell={ell} must satisfy 0 <= ell < n - 1 = {n - 1}")
    k_left = ek - ell
    if k_left < nu:
        raise DomainError(f"only {k_left} Gaussian covariates left for nu={nu}")
    # 1 - I_{1-r}(1/2, b) = I_r(b, 1/2) with r = ss_best / ss_cur
    sf = beta_cdf(ss_best / ss_cur, BetaParams((n - ell - 1) / 2, 0.5))
    return order_statistic_pvalue_sf(sf, k_left, nu)


def step_pvalue(ss_best: float, ss_cur: float, n: int, ell: int, cfg: PvalueConfig, k: int | None = None) -> float:
    """Probability that the nu-th best of ek - ell Gaussian covariates beats the observed best.

    1 - B_{ek-ell+1-nu, nu}(B_{1/2, (n-ell-1)/2}(1 - ss_best/ss_cur)); ek falls back to k.
    """
    ek = cfg.ek if cfg.ek is not None else k
    if ek is None:
        raise DomainError("effective number of covariates unknown: set cfg.ek or pass k")
    return _pvalue(ss_best, ss_cur, n, ell, ek, cfg.nu)


def stepwise(data: Dataset, cfg: PvalueConfig | None = None, excluded=None) -> SelectionPath:
    """Forward selection until the best remaining covariate is no better than Gaussian noise.

    Columns in `excluded` are never candidates and do not count towards ek.
    """
    cfg = cfg or PvalueConfig()
    start = time.perf_counter()
    excluded = set(excluded or ())
    state = init_state(data, cfg.centered)
    n_available = data.k - len(excluded)
    ek = (cfg.ek if cfg.ek is not None else data.k) - len(excluded)
    kmax = min(cfg.kmax or data.k, data.n - 2, n_available)
    steps: list[SelectionStep] = []

    while cfg.alpha > 0 and state.ell < kmax:
        if state.ss_r <= _PERFECT_FIT * state.ss0:
            logger.info("exact fit after %d covariates", state.ell)
            break
        if ek - state.ell < cfg.nu:
            break
        scan = scan_candidates(state, excluded)
        if scan is None:
            break
        j, ss_best = scan
        pvalue = _pvalue(ss_best, state.ss_r, data.n, state.ell, ek, cfg.nu)
        logger.debug("step %d: column %d p=%.6g rss=%.6g", state.ell + 1, j + 1, pvalue, ss_best)
        if pvalue > cfg.alpha:
            break
        add_covariate(state, j)
        misclass = misclassification_count(data, state.active, cfg.centered) if cfg.misclass else None
        steps.append(SelectionStep(column=j, label=data.labels[j], pvalue=pvalue, rss=state.ss_r, misclass=misclass))

    elapsed = time.perf_counter() - start
    logger.info("stepwise n=%d k=%d selected %d in %.3fs", data.n, data.k, len(steps), elapsed)
    return SelectionPath(steps=steps, n=data.n, k=data.k, ss0=state.ss0, elapsed=elapsed)


def repeated_stepwise(
    data: Dataset,
    cfg: PvalueConfig | None = None,
    nmax: int | None = None,
    vmax: int | None = None,
) -> SelectionGroupList:
    """Repeat stepwise on the columns not yet used; each nonempty run is one linear approximation."""
    cfg = cfg or PvalueConfig()
    start = time.perf_counter()
    kmax = cfg.kmax or min(data.n - 2, data.k)
    if vmax is None and nmax is not None:
        vmax = kmax * nmax
    excluded: set[int] = set()
    groups: list[SelectionGroup] = []
    total = 0

    while nmax is None or len(groups) < nmax:
        run_kmax = kmax if vmax is None else min(kmax, vmax - total)
        if run_kmax <= 0 or len(excluded) >= data.k:
            break
        path = stepwise(data, cfg.model_copy(update={"kmax": run_kmax}), excluded=excluded)
        if not path.steps:
            break
        groups.append(SelectionGroup(group_id=len(groups) + 1, steps=path.steps))
        excluded.update(path.columns)
        total += len(path.steps)

    elapsed = time.perf_counter() - start
    logger.info("repeated stepwise: %d covariates in %d groups in %.3fs", total, len(groups), elapsed)
    return SelectionGroupList(groups=groups, elapsed=elapsed)


def label_set(y) -> np.ndarray:
    """Sorted distinct response values; they must be integers."""
    y = np.asarray(y, dtype=float)
    if not np.all(y == np.round(y)):
        raise DomainError("misclassification needs an integer-valued response")
    return np.unique(y)


def classify(fitted, labels) -> np.ndarray:
    """Nearest label for each fitted value; a value on a midpoint goes to the lower label."""
    labels = np.asarray(labels, dtype=float)
    midpoints = (labels[:-1] + labels[1:]) / 2
    return labels[np.searchsorted(midpoints, np.asarray(fitted, dtype=float), side="left")]


def misclassification_count(data: Dataset, subset, centered: bool = True) -> int:
    """Observations whose least-squares fitted value rounds to the wrong label."""
    labels = label_set(data.y)
    fit = fit_subset(data, subset, centered)
    return int(np.count_nonzero(classify(fit.fitted, labels) != data.y))


def averaged_fit(data: Dataset, groups: SelectionGroupList, centered: bool = True) -> np.ndarray:
    """Elementwise mean of the least-squares fits of all groups."""
    if not groups.groups:
        raise DomainError("averaged fit needs at least one group")
    fits = [fit_subset(data, group.columns, centered).fitted for group in groups.groups]
    return np.mean(fits, axis=0)


def averaged_fit_misclassification(data: Dataset, groups: SelectionGroupList, centered: bool = True) -> int:
    """Misclassifications of the averaged fit."""
    labels = label_set(data.y)
    return int(np.count_nonzero(classify(averaged_fit(data, groups, centered), labels) != data.y))
