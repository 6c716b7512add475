"""SQLAlchemy ORM models for the run store."""
from datetime import datetime, timezone

from sqlalchemy import JSON, Column, DateTime, Float, ForeignKey, Integer, String
from sqlalchemy.orm import declarative_base, relationship

Base = declarative_base()


def _now():
    return datetime.now(timezone.utc)


class SelectionRun(Base):
    """One invocation of select, select-all, pvals or graph."""
    __tablename__ = "selection_runs"

    id = Column(Integer, primary_key=True, index=True)
    command = Column(String, nullable=False, index=True)
    created_at = Column(DateTime, default=_now, nullable=False)
    n = Column(Integer, nullable=False)
    k = Column(Integer, nullable=False)
    alpha = Column(Float, nullable=False)
    nu = Column(Float, nullable=False)
    params = Column(JSON, nullable=False, default=dict)
    elapsed = Column(Float, default=0.0, nullable=False)

    covariates = relationship(
        "SelectedCovariate",
        back_populates="run",
        cascade="all, delete-orphan",
        order_by=lambda: [SelectedCovariate.group_id, SelectedCovariate.position],
    )
    edges = relationship("GraphEdgeRecord", back_populates="run", cascade="all, delete-orphan")

    @property
    def n_selected(self) -> int:
        return len(self.edges) if self.command == "graph" else len(self.covariates)


class SelectedCovariate(Base):
    """Covariate chosen in a run, in selection order within its group."""
    __tablename__ = "selected_covariates"

    id = Column(Integer, primary_key=True, index=True)
    run_id = Column(Integer, ForeignKey("selection_runs.id"), nullable=False, index=True)
    group_id = Column(Integer, default=1, nullable=False)
    position = Column(Integer, nullable=False)
    column = Column(Integer, nullable=False)  # 0-based
    label = Column(String, nullable=False)
    pvalue = Column(Float, nullable=False)
    rss = Column(Float, nullable=False)
    misclass = Column(Integer, nullable=True)

    run = relationship("SelectionRun", back_populates="covariates")


class GraphEdgeRecord(Base):
    """Undirected edge of a stored graph run."""
    __tablename__ = "graph_edges"

    id = Column(Integer, primary_key=True, index=True)
    run_id = Column(Integer, ForeignKey("selection_runs.id"), nullable=False, index=True)
    node_i = Column(Integer, nullable=False)
    node_j = Column(Integer, nullable=False)
    p_ij = Column(Float, nullable=True)
    p_ji = Column(Float, nullable=True)

    run = relationship("SelectionRun", back_populates="edges")
