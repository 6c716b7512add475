"""Interaction covariates: every monomial of degree 1..order in the base columns."""
import itertools
import logging
from math import comb

import numpy as np

import config
from errors import DomainError, ExpansionSizeError
from schemas import MonomialTable

logger = logging.getLogger(__name__)


def interaction_count(k: int, order: int) -> int:
    """Number of monomials of degree 1..order in k variables, C(k + order, order) - 1."""
    if k < 1 or order < 1:
        raise DomainError(f"need k >= 1 and order >= 1, got k={k}, order={order}")
    return comb(k + order, order) - 1


def monomial_table(k: int, order: int) -> MonomialTable:
    """Graded lexicographic terms: by degree, then by the sorted index tuple."""
    interaction_count(k, order)
    terms = [
        term
        for degree in range(1, order + 1)
        for term in itertools.combinations_with_replacement(range(k), degree)
    ]
    return MonomialTable(n_base=k, order=order, terms=terms)


def gen_interactions(X, order: int, max_cells: int | None = None) -> tuple[np.ndarray, MonomialTable]:
    """Expanded matrix with one column per monomial, plus its decode table."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise DomainError(f"covariates must be a matrix, got shape {X.shape}")
    n, k = X.shape
    count = interaction_count(k, order)
    limit = config.MAX_EXPANDED_CELLS if max_cells is None else max_cells
    if count * n > limit:
        raise ExpansionSizeError(count, n, limit)

    table = monomial_table(k, order)
    expanded = np.empty((n, count), order="F")
    position: dict[tuple[int, ...], int] = {}
    start = 0
    for degree in range(1, order + 1):
        block = table.terms[start:start + comb(k + degree - 1, degree)]
        cols = np.arange(start, start + len(block))
        lasts = np.fromiter((term[-1] for term in block), dtype=int, count=len(block))
        if degree == 1:
            expanded[:, cols] = X[:, lasts]
        else:
            parents = np.fromiter((position[term[:-1]] for term in block), dtype=int, count=len(block))
            expanded[:, cols] = expanded[:, parents] * X[:, lasts]
        position.update(zip(block, cols.tolist()))
        start += len(block)

    logger.info("expanded %d covariates to %d interactions of order <= %d", k, count, order)
    return expanded, table


def decode(table: MonomialTable, column: int) -> tuple[int, ...]:
    """Base columns (0-based, with multiplicity) of an expanded column."""
    if not 0 <= column < len(table.terms):
        raise DomainError(f"column {column + 1} out of range 1..{len(table.terms)}")
    return table.terms[column]


def encode(table: MonomialTable, multiset) -> int:
    """Expanded column of a multiset of base columns."""
    term = tuple(sorted(int(i) for i in multiset))
    try:
        return table.terms.index(term)
    except ValueError:
        raise DomainError(f"{[i + 1 for i in term]} is not a term of this expansion") from None


def expanded_labels(table: MonomialTable, base_labels) -> list[str]:
    """Column names such as "crim*zn*zn"."""
    base_labels = list(base_labels)
    if len(base_labels) != table.n_base:
        raise DomainError(f"{len(base_labels)} labels for {table.n_base} base covariates")
    return ["*".join(base_labels[i] for i in term) for term in table.terms]
