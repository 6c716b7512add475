"""Dependency graphs by neighborhood selection.

Each node is regressed on the other nodes with the Gaussian covariate
procedure and joined to the nodes selected for it. The per-node cutoff is
alpha divided by the number of nodes unless that division is switched off.
"""
import logging
import time

import numpy as np
from joblib import Parallel, delayed

import config
from errors import DomainError
from regression_engine import Dataset
from schemas import Edge, EdgeList, GraphConfig, PvalueConfig
from stepwise_selection import repeated_stepwise, stepwise

logger = logging.getLogger(__name__)


def _regress_node(
    X: np.ndarray, nodes: list[int], position: int, cfg: PvalueConfig, repeated: bool, nmax=None, vmax=None
):
    node = nodes[position]
    others = nodes[:position] + nodes[position + 1:]
    y = X[:, node]
    if np.ptp(y) == 0:
        logger.warning("node %d is constant; no edges from it", node + 1)
        return {}
    data = Dataset(y, X[:, others])
    if repeated:
        groups = repeated_stepwise(data, cfg, nmax=nmax, vmax=vmax).groups
        steps = [step for group in groups for step in group.steps]
    else:
        steps = stepwise(data, cfg).steps
    logger.debug("node %d: %d neighbors", node + 1, len(steps))
    return {others[step.column]: step.pvalue for step in steps}


def node_cutoff(cfg: GraphConfig, n_nodes: int) -> float:
    """Per-node cutoff: alpha / number of nodes by default."""
    return cfg.alpha / n_nodes if cfg.bonferroni else cfg.alpha


def neighborhood_graph(X, cfg: GraphConfig | None = None, subset=None, n_jobs: int | None = None) -> EdgeList:
    """Undirected edge list; nodes are 0-based columns of X (or of `subset` when given)."""
    cfg = cfg or GraphConfig()
    start = time.perf_counter()
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise DomainError(f"covariates must be a matrix, got shape {X.shape}")
    n, k = X.shape
    nodes = sorted({int(c) for c in subset}) if subset is not None else list(range(k))
    for c in nodes:
        if not 0 <= c < k:
            raise DomainError(f"node {c + 1} out of range 1..{k}")
    if len(nodes) < 2:
        raise DomainError("a graph needs at least two nodes")
    if n < 3:
        raise DomainError(f"need at least 3 observations, got {n}")

    node_cfg = PvalueConfig(
        alpha=node_cutoff(cfg, len(nodes)),
        nu=cfg.nu,
        kmax=cfg.kmax or min(n - 2, config.GRAPH_KMAX),
    )
    results = Parallel(n_jobs=n_jobs or config.N_JOBS)(
        delayed(_regress_node)(X, nodes, position, node_cfg, cfg.repeated, cfg.nmax, cfg.vmax)
        for position in range(len(nodes))
    )

    directed: dict[tuple[int, int], float] = {}
    for node, neighbors in zip(nodes, results):
        for other, pvalue in neighbors.items():
            directed[(node, other)] = pvalue
    edges = []
    for a, b in sorted({(min(pair), max(pair)) for pair in directed}):
        p_ab = directed.get((a, b))
        p_ba = directed.get((b, a))
        if cfg.edge_rule == "and" and (p_ab is None or p_ba is None):
            continue
        edges.append(Edge(i=a, j=b, p_ij=p_ab, p_ji=p_ba))

    elapsed = time.perf_counter() - start
    logger.info("graph on %d nodes: %d edges in %.2fs", len(nodes), len(edges), elapsed)
    return EdgeList(n_nodes=len(nodes), edges=edges, elapsed=elapsed)
