"""Incremental least squares for forward selection.

ResidualState keeps the response residual and every candidate column
residualized against span{1, active columns}, so a scan over all k candidates
costs one matrix-vector product and an inclusion costs one rank-one update.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np

import config
from errors import CollinearityError, DegenerateResponseError, DomainError
from special_functions import BetaParams, beta_cdf, beta_sf

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Dataset:
    """Response y (length n) and covariates X (n x k) with column labels."""
    y: np.ndarray
    X: np.ndarray
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        X = np.asarray(self.X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        if y.ndim != 1:
            raise DomainError(f"response must be a vector, got shape {y.shape}")
        if X.ndim != 2:
            raise DomainError(f"covariates must be a matrix, got shape {X.shape}")
        n, k = X.shape
        if y.shape[0] != n:
            raise DomainError(f"response has {y.shape[0]} rows but covariates have {n}")
        if n < 3:
            raise DomainError(f"need at least 3 observations, got {n}")
        if k < 1:
            raise DomainError("need at least one covariate")
        if not (np.isfinite(y).all() and np.isfinite(X).all()):
            raise DomainError("dataset contains non-finite values")
        labels = tuple(str(label) for label in self.labels) or tuple(str(j + 1) for j in range(k))
        if len(labels) != k:
            raise DomainError(f"{len(labels)} labels for {k} covariates")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def k(self) -> int:
        return self.X.shape[1]

    def restrict(self, columns) -> "Dataset":
        """Dataset on a subset of the covariates, labels carried along."""
        columns = [int(c) for c in columns]
        for c in columns:
            if not 0 <= c < self.k:
                raise DomainError(f"column {c + 1} out of range 1..{self.k}")
        return Dataset(self.y, self.X[:, columns], tuple(self.labels[c] for c in columns))


class ResidualState:
    """Active set plus residuals orthogonal to it."""

    def __init__(self, r_y: np.ndarray, r_X: np.ndarray, centered: bool, tol_colinear: float):
        self.active: list[int] = []
        self.basis: list[np.ndarray] = []
        self.r_y = r_y
        self.r_X = r_X
        self.centered = centered
        self.tol_colinear = tol_colinear
        self.ss0 = float(r_y @ r_y)
        self.ss_r = self.ss0
        self.col_ss = np.einsum("ij,ij->j", r_X, r_X)
        self.orig_ss = self.col_ss.copy()
        self._inactive = np.ones(r_X.shape[1], dtype=bool)

    @property
    def n(self) -> int:
        return self.r_X.shape[0]

    @property
    def k(self) -> int:
        return self.r_X.shape[1]

    @property
    def ell(self) -> int:
        return len(self.active)

    def eligible(self, excluded=None) -> np.ndarray:
        """Mask of inactive candidates whose residual norm is above the collinearity tolerance."""
        mask = self._inactive & (self.orig_ss > 0) & (self.col_ss > self.tol_colinear * self.orig_ss)
        if excluded is not None:
            mask = mask.copy()
            mask[list(excluded)] = False
        return mask


def init_state(data: Dataset, centered: bool = True, tol_colinear: float | None = None) -> ResidualState:
    """Start from the empty active set; centering implements the offset."""
    tol = config.TOL_COLINEAR if tol_colinear is None else tol_colinear
    if centered:
        if np.ptp(data.y) == 0:
            raise DegenerateResponseError("response is constant")
        r_y = data.y - data.y.mean()
        r_X = data.X - data.X.mean(axis=0)
        # exact zeros for constant columns so they never become eligible
        r_X[:, np.ptp(data.X, axis=0) == 0] = 0.0
    else:
        r_y = data.y.copy()
        r_X = data.X.copy()
    state = ResidualState(r_y, r_X, centered, tol)
    if state.ss0 == 0:
        raise DegenerateResponseError("response has zero sum of squares")
    return state


def scan_candidates(state: ResidualState, excluded=None) -> tuple[int, float] | None:
    """Best single addition: (column, RSS after adding it), or None if nothing is eligible.

    Ties go to the lowest column index.
    """
    mask = state.eligible(excluded)
    if not mask.any():
        return None
    inner = state.r_y @ state.r_X
    reduction = np.full(state.k, -np.inf)
    reduction[mask] = inner[mask] ** 2 / state.col_ss[mask]
    best = int(np.argmax(reduction))
    ss_best = min(max(state.ss_r - float(reduction[best]), 0.0), state.ss_r)
    return best, ss_best


def add_covariate(state: ResidualState, j: int) -> ResidualState:
    """Move column j into the active set and re-orthogonalize everything against it."""
    if not 0 <= j < state.k:
        raise DomainError(f"column {j + 1} out of range 1..{state.k}")
    if not state._inactive[j]:
        raise DomainError(f"column {j + 1} is already active")
    if not state.eligible()[j]:
        raise CollinearityError(
            f"column {j + 1} is collinear with the active set "
            f"(residual ratio {state.col_ss[j] / state.orig_ss[j] if state.orig_ss[j] else 0.0:.3g})"
        )
    q = state.r_X[:, j] / math.sqrt(state.col_ss[j])
    state.r_X -= np.outer(q, q @ state.r_X)
    state.r_X[:, j] = 0.0
    gain = float(q @ state.r_y)
    state.r_y -= gain * q
    state.ss_r = max(float(state.r_y @ state.r_y), 0.0)
    state.col_ss = np.einsum("ij,ij->j", state.r_X, state.r_X)
    state.active.append(j)
    state.basis.append(q)
    state._inactive[j] = False
    logger.debug("added column %d, rss %.6g", j + 1, state.ss_r)
    return state


@dataclass(frozen=True)
class SubsetFit:
    """Least-squares refit on a fixed set of columns."""
    columns: tuple[int, ...]
    intercept: float
    coefficients: np.ndarray
    fitted: np.ndarray
    rss: float


def fit_subset(data: Dataset, columns, centered: bool = True) -> SubsetFit:
    """Dense least squares of y on the listed columns (plus intercept when centered)."""
    columns = tuple(int(c) for c in columns)
    blocks = [np.ones(data.n)] if centered else []
    blocks += [data.X[:, c] for c in columns]
    if not blocks:
        fitted = np.zeros(data.n)
        return SubsetFit(columns, 0.0, np.zeros(0), fitted, float(data.y @ data.y))
    A = np.column_stack(blocks)
    coef, *_ = np.linalg.lstsq(A, data.y, rcond=None)
    fitted = A @ coef
    resid = data.y - fitted
    intercept = float(coef[0]) if centered else 0.0
    slopes = coef[1:] if centered else coef
    return SubsetFit(columns, intercept, slopes, fitted, float(resid @ resid))


def block_pvalue(ss_small: float, ss_large: float, n: int, ell: int, ell_prime: int) -> float:
    """P-value of adding ell_prime - ell covariates jointly, against as many Gaussian covariates.

    Under the Gaussian alternative 1 - ss_large/ss_small ~ Beta((ell' - ell)/2, (n - ell')/2).
    """
    if ell_prime <= ell or ell < 0:
        raise DomainError(f"need 0 <= ell < ell_prime, got ell={ell}, ell_prime={ell_prime}")
    if ell_prime >= n:
        raise DomainError(f"ell_prime={ell_prime} must be below n={n}")
    if ss_small <= 0 or not 0 <= ss_large <= ss_small:
        raise DomainError(f"need 0 <= ss_large <= ss_small with ss_small > 0, got {ss_large}, {ss_small}")
    # 1 - I_{1-r}(p, q) = I_r(q, p) with r = ss_large / ss_small
    return beta_cdf(ss_large / ss_small, BetaParams((n - ell_prime) / 2, (ell_prime - ell) / 2))


def single_covariate_pvalues(y, x, centered: bool = True) -> tuple[float, float]:
    """F-test P-value and Gaussian covariate P-value of one covariate; they coincide.

    p_F = 1 - F_{1,n-1}(F) is evaluated through I_{m/(m+F)}(m/2, 1/2) and
    p_B = 1 - I_B(1/2, m/2) with B = 1 - ss_r/ss_y, m = n - 1.
    """
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    n = y.shape[0]
    if n < 3 or x.shape != y.shape:
        raise DomainError(f"need matching vectors of length >= 3, got {y.shape} and {x.shape}")
    if np.ptp(x) == 0 and (centered or not x.any()):
        raise DomainError("covariate is constant")
    if centered:
        y = y - y.mean()
        x = x - x.mean()
    ss_y = float(y @ y)
    if ss_y == 0:
        raise DegenerateResponseError("response has zero sum of squares")
    sxx = float(x @ x)
    sxy = float(x @ y)
    ss_r = min(max(ss_y - sxy * sxy / sxx, 0.0), ss_y)
    m = n - 1
    if ss_r == 0:
        p_f = 0.0
    else:
        f_stat = (ss_y - ss_r) / (ss_r / m)
        p_f = beta_cdf(m / (m + f_stat), BetaParams(m / 2, 0.5))
    p_b = beta_sf(1.0 - ss_r / ss_y, BetaParams(0.5, m / 2))
    return p_f, p_b
