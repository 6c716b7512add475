"""FastAPI application exposing selection, post-selection P-values, graphs and stored runs."""
import logging
from contextlib import asynccontextmanager, contextmanager

import numpy as np
from fastapi import Depends, FastAPI, HTTPException
from sqlalchemy.orm import Session

import config
from database import get_db, init_db
from errors import CovselectError, DataError
from schemas import (
    GraphConfig,
    GraphRequest,
    GraphResponse,
    PostSelectionResult,
    PvalsRequest,
    PvalueConfig,
    RunDetail,
    RunSummary,
    SelectAllRequest,
    SelectAllResponse,
    SelectRequest,
    SelectResponse,
)
from services import GraphService, RunService, SelectionService, dataset_from_payload

logger = logging.getLogger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI):
    """Initialize the run store on startup."""
    init_db()
    yield


app = FastAPI(title="covselect", lifespan=lifespan)


@contextmanager
def translate_errors():
    """Domain and data errors (and malformed arrays) become 422, other covselect errors 400."""
    try:
        yield
    except (DataError, ValueError) as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from None
    except CovselectError as exc:
        logger.error("request failed: %s", exc)
        raise HTTPException(status_code=400, detail=str(exc)) from None


def _pvalue_config(request: SelectRequest) -> PvalueConfig:
    return PvalueConfig(
        alpha=request.alpha,
        kmax=request.kmax,
        nu=request.nu,
        ek=request.ek,
        centered=request.centered,
        misclass=request.misclass,
    )


@app.get("/health")
def health():
    """Health check endpoint."""
    return {"status": "ok"}


@app.post("/select", response_model=SelectResponse)
def select(request: SelectRequest, db: Session = Depends(get_db)):
    """Stepwise Gaussian covariate selection."""
    with translate_errors():
        data = dataset_from_payload(request)
        path, run_id = SelectionService.select(data, _pvalue_config(request), db=db if request.save else None)
    return SelectResponse(run_id=run_id, path=path)


@app.post("/select-all", response_model=SelectAllResponse)
def select_all(request: SelectAllRequest, db: Session = Depends(get_db)):
    """Repeated stepwise selection."""
    with translate_errors():
        data = dataset_from_payload(request)
        result, run_id = SelectionService.select_all(
            data, _pvalue_config(request), nmax=request.nmax, vmax=request.vmax, db=db if request.save else None
        )
    return SelectAllResponse(run_id=run_id, result=result)


@app.post("/pvals", response_model=list[PostSelectionResult])
def pvals(request: PvalsRequest):
    """P-values for an externally chosen set of 1-based covariate indices."""
    with translate_errors():
        data = dataset_from_payload(request)
        results, _, _ = SelectionService.pvals(
            data,
            [i - 1 for i in request.ind],
            alpha=request.alpha,
            alpha1=request.alpha1,
            augmented=request.augmented,
            misclass=request.misclass,
        )
    return results


@app.post("/graph", response_model=GraphResponse)
def graph(request: GraphRequest, db: Session = Depends(get_db)):
    """Neighborhood-selection dependency graph over the columns of X."""
    with translate_errors():
        cfg = GraphConfig(
            alpha=request.alpha,
            nu=request.nu,
            repeated=request.repeated,
            bonferroni=request.bonferroni,
            edge_rule=request.edge_rule,
            kmax=request.kmax,
            nmax=request.nmax,
            vmax=request.vmax,
        )
        subset = [i - 1 for i in request.nodes] if request.nodes is not None else None
        edges, run_id = GraphService.build(
            np.asarray(request.X, dtype=float), cfg, subset=subset, n_jobs=config.N_JOBS,
            db=db if request.save else None,
        )
    return GraphResponse(run_id=run_id, graph=edges)


@app.get("/runs", response_model=list[RunSummary])
def list_runs(limit: int = 50, db: Session = Depends(get_db)):
    """Stored runs, most recent first."""
    return RunService.list_runs(db, limit=limit)


@app.get("/runs/{run_id}", response_model=RunDetail)
def get_run(run_id: int, db: Session = Depends(get_db)):
    """Stored run with its covariates or edges."""
    run = RunService.get_run(db, run_id)
    if run is None:
        raise HTTPException(status_code=404, detail=f"run {run_id} not found")
    return run


if __name__ == "__main__":
    import uvicorn
    uvicorn.run(app, port=8000)
