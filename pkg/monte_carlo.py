"""Seeded simulation harnesses for false positives, tutorial benchmarks and graph recovery.

Replication r draws from SeedSequence([seed, r]), so results are identical for
any worker count.
"""
import logging
import time

import numpy as np
from joblib import Parallel, delayed
from scipy.linalg import LinAlgError, cholesky, solve_triangular, toeplitz

import config
from errors import DomainError
from graph_estimation import neighborhood_graph
from regression_engine import Dataset
from schemas import FpTable, GraphConfig, GraphSimResult, MisclassTable, PvalueConfig, SimConfig, TutorialResult
from stepwise_selection import label_set, misclassification_count, stepwise

logger = logging.getLogger(__name__)


def replication_rng(seed: int, replication: int) -> np.random.Generator:
    """Independent generator for one replication of a harness run."""
    return np.random.default_rng(np.random.SeedSequence([seed, replication]))


def _fp_replication(cfg: SimConfig, replication: int) -> int:
    rng = replication_rng(cfg.seed, replication)
    y = rng.standard_normal(cfg.n)
    X = rng.standard_normal((cfg.n, cfg.k))
    path = stepwise(Dataset(y, X), PvalueConfig(alpha=cfg.alpha, nu=cfg.nu, kmax=cfg.kmx, ek=cfg.k))
    return len(path.steps)


def simulate_false_positives(cfg: SimConfig, n_jobs: int | None = None) -> FpTable:
    """Frequencies of 0..kmx selections when response and covariates are all Gaussian noise."""
    if cfg.nu > cfg.k:
        raise DomainError(f"nu={cfg.nu} exceeds k={cfg.k}")
    start = time.perf_counter()
    counts = Parallel(n_jobs=n_jobs or config.N_JOBS)(
        delayed(_fp_replication)(cfg, r) for r in range(cfg.nsim)
    )
    frequencies = np.bincount(counts, minlength=cfg.kmx + 1) / cfg.nsim
    mean = float(np.dot(np.arange(frequencies.size), frequencies))
    elapsed = time.perf_counter() - start
    logger.info("false positives n=%d k=%d nu=%g: mean %.3f over %d runs", cfg.n, cfg.k, cfg.nu, mean, cfg.nsim)
    return FpTable(
        n=cfg.n, k=cfg.k, alpha=cfg.alpha, nu=cfg.nu, nsim=cfg.nsim,
        frequencies=frequencies.tolist(), mean=mean, elapsed=elapsed,
    )


def _tutorial_replication(cfg: SimConfig, chol: np.ndarray, replication: int) -> tuple[int, int]:
    rng = replication_rng(cfg.seed, replication)
    X = rng.standard_normal((cfg.n, cfg.k)) @ chol.T
    active = rng.choice(cfg.k, size=cfg.s, replace=False)
    beta = np.zeros(cfg.k)
    beta[active] = cfg.amplitude / np.sqrt(cfg.n) * rng.choice([-1.0, 1.0], size=cfg.s)
    y = X @ beta + rng.standard_normal(cfg.n)
    path = stepwise(
        Dataset(y, X),
        PvalueConfig(alpha=cfg.alpha, nu=cfg.nu, kmax=min(cfg.k, cfg.n - 2), ek=cfg.k),
    )
    selected = set(path.columns)
    truth = set(active.tolist())
    return len(selected - truth), len(truth - selected)


def tutorial_sim(variant: int, cfg: SimConfig, n_jobs: int | None = None) -> TutorialResult:
    """Sparse linear model with Toeplitz-correlated covariates; average fp and fn of stepwise."""
    if variant not in (1, 2):
        raise DomainError(f"tutorial variant must be 1 or 2, got {variant}")
    if not -1 < cfg.rho < 1:
        raise DomainError(f"rho={cfg.rho} must lie in (-1, 1)")
    start = time.perf_counter()
    chol = cholesky(toeplitz(cfg.rho ** np.arange(cfg.k)), lower=True)
    outcomes = Parallel(n_jobs=n_jobs or config.N_JOBS)(
        delayed(_tutorial_replication)(cfg, chol, r) for r in range(cfg.nsim)
    )
    fp, fn = np.mean(np.asarray(outcomes, dtype=float), axis=0)
    elapsed = time.perf_counter() - start
    logger.info("tutorial %d nu=%g: fp %.2f fn %.2f in %.1fs", variant, cfg.nu, fp, fn, elapsed)
    return TutorialResult(variant=variant, nu=cfg.nu, nsim=cfg.nsim, fp_mean=fp, fn_mean=fn, elapsed=elapsed)


def bidiagonal_precision(k: int, rho: float) -> np.ndarray:
    """Precision matrix with 1 on the diagonal and rho on the first off-diagonals."""
    return np.eye(k) + rho * (np.eye(k, k, 1) + np.eye(k, k, -1))


def sample_from_precision(theta: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    """n rows from N(0, theta^-1) via the Cholesky factor of theta."""
    try:
        lower = cholesky(theta, lower=True)
    except LinAlgError:
        raise DomainError("precision matrix is not positive definite") from None
    z = rng.standard_normal((theta.shape[0], n))
    return solve_triangular(lower.T, z, lower=False).T


def bidiagonal_graph_sim(
    n: int,
    k: int,
    rho: float = 0.25,
    alpha: float = 0.05,
    seed: int = 0,
    nu: float = 1.0,
    n_jobs: int | None = None,
) -> GraphSimResult:
    """Recover the path graph of a bidiagonal precision matrix; count edge errors."""
    if k < 2 or n < 3:
        raise DomainError(f"need k >= 2 and n >= 3, got k={k}, n={n}")
    X = sample_from_precision(bidiagonal_precision(k, rho), n, replication_rng(seed, 0))
    graph = neighborhood_graph(X, GraphConfig(alpha=alpha, nu=nu), n_jobs=n_jobs)
    truth = {(i, i + 1) for i in range(k - 1)} if rho != 0 else set()
    found = graph.pairs()
    result = GraphSimResult(
        fp_edges=len(found - truth), fn_edges=len(truth - found), n_true_edges=len(truth), graph=graph,
    )
    logger.info("bidiagonal graph k=%d: %d false positives, %d false negatives", k, result.fp_edges, result.fn_edges)
    return result


def _overfit_replication(data: Dataset, keep: list[int], kmax: int, seed: int, replication: int) -> int:
    rng = replication_rng(seed, replication)
    noise = rng.standard_normal((data.n, data.k - len(keep)))
    simulated = Dataset(data.y, np.column_stack([data.X[:, keep], noise]))
    path = stepwise(simulated, PvalueConfig(alpha=1.0, kmax=kmax))
    return misclassification_count(simulated, path.columns)


def overfit_sim(data: Dataset, keep, kmax: int, nsim: int = 100, seed: int = 0, n_jobs: int | None = None) -> MisclassTable:
    """Keep some real covariates, replace the rest by noise, force kmax selections, count misclassifications."""
    keep = sorted({int(c) for c in keep})
    for c in keep:
        if not 0 <= c < data.k:
            raise DomainError(f"covariate {c + 1} out of range 1..{data.k}")
    if kmax < 1 or nsim < 1:
        raise DomainError(f"need kmax >= 1 and nsim >= 1, got kmax={kmax}, nsim={nsim}")
    label_set(data.y)
    counts = Parallel(n_jobs=n_jobs or config.N_JOBS)(
        delayed(_overfit_replication)(data, keep, kmax, seed, r) for r in range(nsim)
    )
    values, tallies = np.unique(counts, return_counts=True)
    frequencies = {int(v): float(t) / nsim for v, t in zip(values, tallies)}
    mean = float(sum(v * f for v, f in frequencies.items()))
    return MisclassTable(nsim=nsim, kept=keep, kmax=kmax, frequencies=frequencies, mean=mean)
