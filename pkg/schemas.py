"""Pydantic models for selection configs, results and API request/response validation."""
from datetime import datetime
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

import config


class PvalueConfig(BaseModel):
    """Knobs of the Gaussian covariate P-value: cutoff, order statistic, effective k."""
    model_config = ConfigDict(frozen=True)

    alpha: float = Field(default=config.DEFAULT_ALPHA, ge=0.0, le=1.0)
    kmax: Optional[int] = Field(default=None, ge=1)
    nu: float = Field(default=1.0, ge=1.0)
    ek: Optional[float] = Field(default=None, gt=0.0)
    centered: bool = True
    misclass: bool = False

    @model_validator(mode="after")
    def _nu_within_ek(self):
        if self.ek is not None and self.nu > self.ek:
            raise ValueError(f"nu={self.nu} exceeds the effective number of covariates ek={self.ek}")
        return self


class SelectionStep(BaseModel):
    """One selected covariate: 0-based column, P-value at inclusion, RSS after inclusion."""
    column: int = Field(ge=0)
    label: str
    pvalue: float = Field(ge=0.0, le=1.0)
    rss: float = Field(ge=0.0)
    misclass: Optional[int] = None

    @property
    def index(self) -> int:
        """1-based index used in every report."""
        return self.column + 1


class SelectionPath(BaseModel):
    """Ordered result of one stepwise run."""
    steps: list[SelectionStep] = []
    n: int
    k: int
    ss0: float
    elapsed: float = 0.0

    @property
    def columns(self) -> list[int]:
        return [step.column for step in self.steps]


class SelectionGroup(BaseModel):
    """One linear approximation of the repeated procedure."""
    group_id: int = Field(ge=1)
    steps: list[SelectionStep]

    @property
    def columns(self) -> list[int]:
        return [step.column for step in self.steps]


class SelectionGroupList(BaseModel):
    """Disjoint groups produced by repeated stepwise selection."""
    groups: list[SelectionGroup] = []
    elapsed: float = 0.0

    @property
    def total_covariates(self) -> int:
        return sum(len(group.steps) for group in self.groups)


class Companion(BaseModel):
    """A further member of the subset that gave a covariate its smallest P-value."""
    column: int = Field(ge=0)
    augmenting: bool = False
    in_selection: bool = True

    @property
    def signed_index(self) -> int:
        # augmenting covariates that were already in the initial choice carry a minus sign
        if self.augmenting and self.in_selection:
            return -(self.column + 1)
        return self.column + 1


class PostSelectionResult(BaseModel):
    """Final P-value of one covariate from an external selection."""
    column: int = Field(ge=0)
    label: str
    pvalue: float = Field(ge=0.0, le=1.0)
    companions: list[Companion] = Field(default_factory=list, max_length=2)
    rss: float = Field(ge=0.0)
    misclass: Optional[int] = None
    in_selection: bool = True

    @property
    def index(self) -> int:
        return self.column + 1


class MonomialTable(BaseModel):
    """Decode table of an interaction expansion: one sorted tuple of base columns per expanded column."""
    model_config = ConfigDict(frozen=True)

    n_base: int = Field(ge=1)
    order: int = Field(ge=1)
    terms: list[tuple[int, ...]]

    def to_text(self) -> str:
        """One line per expanded column, space-separated 1-based base indices."""
        return "".join(" ".join(str(i + 1) for i in term) + "\n" for term in self.terms)

    @classmethod
    def from_text(cls, text: str) -> "MonomialTable":
        terms = [tuple(int(tok) - 1 for tok in line.split()) for line in text.splitlines() if line.strip()]
        if not terms:
            raise ValueError("empty decode table")
        return cls(
            n_base=max(max(term) for term in terms) + 1,
            order=max(len(term) for term in terms),
            terms=terms,
        )


class Edge(BaseModel):
    """Undirected edge {i, j} with i < j; p_ij is the P-value of j in the regression of i."""
    i: int = Field(ge=0)
    j: int = Field(ge=0)
    p_ij: Optional[float] = None
    p_ji: Optional[float] = None

    @model_validator(mode="after")
    def _ordered(self):
        if self.i >= self.j:
            raise ValueError(f"edge ({self.i}, {self.j}) must satisfy i < j")
        return self


class EdgeList(BaseModel):
    """Dependency graph from neighborhood selection, sorted by (i, j)."""
    n_nodes: int = Field(ge=0)
    edges: list[Edge] = []
    elapsed: float = 0.0

    def pairs(self) -> set[tuple[int, int]]:
        return {(edge.i, edge.j) for edge in self.edges}

    def to_text(self) -> str:
        """Edge file: "i j p_ij p_ji" per line, 1-based, NA for a direction without selection."""
        def fmt(p: Optional[float]) -> str:
            return "NA" if p is None else f"{p:.7g}"

        return "".join(
            f"{edge.i + 1} {edge.j + 1} {fmt(edge.p_ij)} {fmt(edge.p_ji)}\n" for edge in self.edges
        )


class GraphConfig(BaseModel):
    """Options of the neighborhood graph construction."""
    model_config = ConfigDict(frozen=True)

    alpha: float = Field(default=config.DEFAULT_ALPHA, ge=0.0, le=1.0)
    nu: float = Field(default=1.0, ge=1.0)
    repeated: bool = False
    bonferroni: bool = True
    edge_rule: Literal["or", "and"] = "or"
    kmax: Optional[int] = Field(default=None, ge=1)
    nmax: Optional[int] = Field(default=None, ge=1)
    vmax: Optional[int] = Field(default=None, ge=1)


class SimConfig(BaseModel):
    """Monte-Carlo harness settings; one master seed drives every replication."""
    model_config = ConfigDict(frozen=True)

    seed: int = Field(default=0, ge=0, lt=2**64)
    nsim: int = Field(default=100, ge=1)
    n: int = Field(ge=3)
    k: int = Field(ge=1)
    s: int = Field(default=0, ge=0)
    amplitude: float = Field(default=0.0, ge=0.0)
    alpha: float = Field(default=config.DEFAULT_ALPHA, ge=0.0, le=1.0)
    nu: float = Field(default=1.0, ge=1.0)
    kmx: int = Field(default=10, ge=1)
    rho: float = 0.25

    @model_validator(mode="after")
    def _active_within_k(self):
        if self.s > self.k:
            raise ValueError(f"active count s={self.s} exceeds k={self.k}")
        return self


class FpTable(BaseModel):
    """Empirical frequencies of the number of selections under pure noise."""
    n: int
    k: int
    alpha: float
    nu: float
    nsim: int
    frequencies: list[float]
    mean: float
    elapsed: float = 0.0


class TutorialResult(BaseModel):
    """Average false positives / negatives of one tutorial configuration."""
    variant: int
    nu: float
    nsim: int
    fp_mean: float = Field(ge=0.0)
    fn_mean: float = Field(ge=0.0)
    elapsed: float = 0.0


class GraphSimResult(BaseModel):
    """Edge errors of one bidiagonal-precision graph simulation."""
    fp_edges: int = Field(ge=0)
    fn_edges: int = Field(ge=0)
    n_true_edges: int = Field(ge=0)
    graph: EdgeList


class MisclassTable(BaseModel):
    """Frequencies of misclassification counts when noise replaces the unkept covariates."""
    nsim: int
    kept: list[int]
    kmax: int
    frequencies: dict[int, float]
    mean: float


# HTTP request/response bodies

class DataPayload(BaseModel):
    """Inline dataset: response vector and row-major covariate matrix."""
    y: list[float]
    X: list[list[float]]
    labels: Optional[list[str]] = None


class SelectRequest(DataPayload):
    """Request body for /select."""
    alpha: float = Field(default=config.DEFAULT_ALPHA, ge=0.0, le=1.0)
    kmax: Optional[int] = Field(default=None, ge=1)
    nu: float = Field(default=1.0, ge=1.0)
    ek: Optional[float] = Field(default=None, gt=0.0)
    centered: bool = True
    misclass: bool = False
    save: bool = False


class SelectAllRequest(SelectRequest):
    """Request body for /select-all."""
    nmax: Optional[int] = Field(default=None, ge=1)
    vmax: Optional[int] = Field(default=None, ge=1)


class PvalsRequest(DataPayload):
    """Request body for /pvals; ind holds 1-based column indices."""
    ind: list[int]
    alpha: float = Field(default=config.DEFAULT_ALPHA, ge=0.0, le=1.0)
    alpha1: float = Field(default=config.DEFAULT_ALPHA, ge=0.0, le=1.0)
    augmented: bool = False
    misclass: bool = False


class GraphRequest(BaseModel):
    """Request body for /graph; nodes holds 1-based column indices."""
    X: list[list[float]]
    alpha: float = Field(default=config.DEFAULT_ALPHA, ge=0.0, le=1.0)
    nu: float = Field(default=1.0, ge=1.0)
    repeated: bool = False
    bonferroni: bool = True
    edge_rule: Literal["or", "and"] = "or"
    nodes: Optional[list[int]] = None
    kmax: Optional[int] = Field(default=None, ge=1)
    nmax: Optional[int] = Field(default=None, ge=1)
    vmax: Optional[int] = Field(default=None, ge=1)
    save: bool = False


class SelectResponse(BaseModel):
    """Response for /select."""
    run_id: Optional[int] = None
    path: SelectionPath


class SelectAllResponse(BaseModel):
    """Response for /select-all."""
    run_id: Optional[int] = None
    result: SelectionGroupList


class GraphResponse(BaseModel):
    """Response for /graph."""
    run_id: Optional[int] = None
    graph: EdgeList


class StoredCovariate(BaseModel):
    """Selected covariate row of a stored run."""
    model_config = ConfigDict(from_attributes=True)

    group_id: int
    position: int
    column: int
    label: str
    pvalue: float
    rss: float
    misclass: Optional[int] = None


class StoredEdge(BaseModel):
    """Edge row of a stored graph run; nodes are 0-based."""
    model_config = ConfigDict(from_attributes=True)

    node_i: int
    node_j: int
    p_ij: Optional[float] = None
    p_ji: Optional[float] = None


class RunSummary(BaseModel):
    """Stored run without its rows."""
    model_config = ConfigDict(from_attributes=True)

    id: int
    command: str
    created_at: datetime
    n: int
    k: int
    alpha: float
    nu: float
    elapsed: float
    n_selected: int


class RunDetail(RunSummary):
    """Stored run with its selected covariates."""
    params: dict
    covariates: list[StoredCovariate] = []
    edges: list[StoredEdge] = []
