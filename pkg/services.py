"""Service layer shared by the CLI and the HTTP API: run selections, store and fetch runs."""
import logging
import time

import numpy as np
from sqlalchemy.orm import Session

from graph_estimation import neighborhood_graph
from models import GraphEdgeRecord, SelectedCovariate, SelectionRun
from post_selection import pval_subsets, pval_subsets_augmented
from regression_engine import Dataset
from schemas import (
    DataPayload,
    EdgeList,
    GraphConfig,
    PostSelectionResult,
    PvalueConfig,
    SelectionGroup,
    SelectionGroupList,
    SelectionPath,
)
from stepwise_selection import repeated_stepwise, stepwise

logger = logging.getLogger(__name__)


def dataset_from_payload(payload: DataPayload) -> Dataset:
    """Dataset from an inline request body."""
    return Dataset(np.asarray(payload.y, dtype=float), np.asarray(payload.X, dtype=float), tuple(payload.labels or ()))


def _remap(steps, columns):
    return [step.model_copy(update={"column": columns[step.column]}) for step in steps]


class SelectionService:
    """Selection procedures, optionally restricted to a column subset and saved to the run store."""

    @staticmethod
    def select(data: Dataset, cfg: PvalueConfig, columns=None, db: Session | None = None):
        """Stepwise selection; returns (path, run_id).

        With `columns` (0-based) only those covariates are candidates and
        reported columns refer to the full dataset.
        """
        if columns is None:
            path = stepwise(data, cfg)
        else:
            columns = list(columns)
            path = stepwise(data.restrict(columns), cfg)
            path = path.model_copy(update={"steps": _remap(path.steps, columns), "k": data.k})
        run_id = None
        if db is not None:
            run = RunService.save_groups(
                db, "select", data, cfg, [(1, path.steps)], path.elapsed, {"columns": columns}
            )
            run_id = run.id
        return path, run_id

    @staticmethod
    def select_all(
        data: Dataset,
        cfg: PvalueConfig,
        nmax: int | None = None,
        vmax: int | None = None,
        columns=None,
        db: Session | None = None,
    ):
        """Repeated stepwise; returns (groups, run_id)."""
        if columns is None:
            result = repeated_stepwise(data, cfg, nmax=nmax, vmax=vmax)
        else:
            columns = list(columns)
            result = repeated_stepwise(data.restrict(columns), cfg, nmax=nmax, vmax=vmax)
            result = SelectionGroupList(
                groups=[
                    SelectionGroup(group_id=g.group_id, steps=_remap(g.steps, columns)) for g in result.groups
                ],
                elapsed=result.elapsed,
            )
        run_id = None
        if db is not None:
            run = RunService.save_groups(
                db,
                "select-all",
                data,
                cfg,
                [(g.group_id, g.steps) for g in result.groups],
                result.elapsed,
                {"nmax": nmax, "vmax": vmax, "columns": columns},
            )
            run_id = run.id
        return result, run_id

    @staticmethod
    def pvals(
        data: Dataset,
        ind,
        alpha: float,
        alpha1: float,
        augmented: bool = False,
        misclass: bool = False,
        db: Session | None = None,
    ):
        """Subset P-values for an external selection (0-based `ind`); returns (results, elapsed, run_id)."""
        start = time.perf_counter()
        scorer = pval_subsets_augmented if augmented else pval_subsets
        results: list[PostSelectionResult] = scorer(data, ind, alpha=alpha, alpha1=alpha1, misclass=misclass)
        elapsed = time.perf_counter() - start
        run_id = None
        if db is not None:
            run = RunService.save_pvals(db, data, ind, alpha, alpha1, augmented, results, elapsed)
            run_id = run.id
        return results, elapsed, run_id


class GraphService:
    """Neighborhood-selection graphs."""

    @staticmethod
    def build(X, cfg: GraphConfig, subset=None, n_jobs: int | None = None, db: Session | None = None):
        """Edge list over the columns of X; returns (graph, run_id)."""
        graph = neighborhood_graph(X, cfg, subset=subset, n_jobs=n_jobs)
        run_id = None
        if db is not None:
            X = np.asarray(X)
            run = RunService.save_graph(db, X.shape, cfg, graph, subset)
            run_id = run.id
        return graph, run_id


class RunService:
    """Persistence of runs in the run store."""

    @staticmethod
    def save_groups(db: Session, command: str, data: Dataset, cfg: PvalueConfig, groups, elapsed: float, extra=None):
        """Store a selection run; `groups` is a list of (group_id, steps)."""
        params = cfg.model_dump()
        params.update({key: value for key, value in (extra or {}).items() if value is not None})
        run = SelectionRun(
            command=command, n=data.n, k=data.k, alpha=cfg.alpha, nu=cfg.nu, params=params, elapsed=elapsed
        )
        for group_id, steps in groups:
            for position, step in enumerate(steps, start=1):
                run.covariates.append(
                    SelectedCovariate(
                        group_id=group_id,
                        position=position,
                        column=step.column,
                        label=step.label,
                        pvalue=step.pvalue,
                        rss=step.rss,
                        misclass=step.misclass,
                    )
                )
        db.add(run)
        db.commit()
        db.refresh(run)
        logger.info("saved %s run %d with %d covariates", command, run.id, len(run.covariates))
        return run

    @staticmethod
    def save_pvals(db: Session, data: Dataset, ind, alpha, alpha1, augmented, results, elapsed):
        """Store a post-selection run; companions go into the params."""
        run = SelectionRun(
            command="pvals",
            n=data.n,
            k=data.k,
            alpha=alpha,
            nu=1.0,
            params={
                "ind": sorted(int(c) for c in ind),
                "alpha1": alpha1,
                "augmented": augmented,
                "companions": {str(r.column): [c.signed_index for c in r.companions] for r in results},
            },
            elapsed=elapsed,
        )
        for position, result in enumerate(results, start=1):
            run.covariates.append(
                SelectedCovariate(
                    group_id=1,
                    position=position,
                    column=result.column,
                    label=result.label,
                    pvalue=result.pvalue,
                    rss=result.rss,
                    misclass=result.misclass,
                )
            )
        db.add(run)
        db.commit()
        db.refresh(run)
        return run

    @staticmethod
    def save_graph(db: Session, shape, cfg: GraphConfig, graph: EdgeList, subset=None):
        """Store a graph run with its edges."""
        params = cfg.model_dump()
        if subset is not None:
            params["nodes"] = sorted(int(c) for c in subset)
        run = SelectionRun(
            command="graph", n=shape[0], k=shape[1], alpha=cfg.alpha, nu=cfg.nu, params=params, elapsed=graph.elapsed
        )
        for edge in graph.edges:
            run.edges.append(GraphEdgeRecord(node_i=edge.i, node_j=edge.j, p_ij=edge.p_ij, p_ji=edge.p_ji))
        db.add(run)
        db.commit()
        db.refresh(run)
        logger.info("saved graph run %d with %d edges", run.id, len(graph.edges))
        return run

    @staticmethod
    def list_runs(db: Session, limit: int = 50):
        """Most recent runs first."""
        return db.query(SelectionRun).order_by(SelectionRun.id.desc()).limit(limit).all()

    @staticmethod
    def get_run(db: Session, run_id: int):
        """Run by id, or None."""
        return db.query(SelectionRun).filter(SelectionRun.id == run_id).first()
