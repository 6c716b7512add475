"""Delimited numeric tables: comma or whitespace separated, optional header row."""
import io
import logging
from pathlib import Path

import numpy as np
import pandas as pd

from errors import DataError
from regression_engine import Dataset

logger = logging.getLogger(__name__)


def _numbered_lines(path: Path) -> list[tuple[int, str]]:
    """Non-blank lines with their 1-based line numbers in the file."""
    try:
        text = path.read_text(encoding="utf-8-sig")
    except UnicodeDecodeError:
        raise DataError(f"{path} is not UTF-8 text") from None
    lines = [(number, line) for number, line in enumerate(text.splitlines(), start=1) if line.strip()]
    if not lines:
        raise DataError(f"{path} is empty")
    return lines


def _is_number(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True


def read_frame(path) -> pd.DataFrame:
    """Numeric frame; the header is detected from the first line, the delimiter too."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"{path} does not exist")
    lines = _numbered_lines(path)
    first = lines[0][1]
    sep = "," if "," in first else r"\s+"
    tokens = [tok.strip().strip('"') for tok in (first.split(",") if sep == "," else first.split())]
    has_header = not all(_is_number(tok) for tok in tokens if tok)
    # header=None so that every row, the header included, must have the same width
    try:
        raw = pd.read_csv(
            io.StringIO("\n".join(line for _, line in lines)),
            sep=sep,
            header=None,
            dtype=str,
            keep_default_na=False,
        )
    except pd.errors.ParserError:
        raise DataError(f"{path} is not rectangular: rows have more fields than the first line") from None
    except pd.errors.EmptyDataError:
        raise DataError(f"{path} has no data rows") from None

    line_numbers = [number for number, _ in lines]
    if has_header:
        header = [str(v).strip() or str(c + 1) for c, v in enumerate(raw.iloc[0])]
        raw = raw.iloc[1:].reset_index(drop=True)
        line_numbers = line_numbers[1:]
    else:
        header = [str(c + 1) for c in range(raw.shape[1])]
    if raw.empty:
        raise DataError(f"{path} has no data rows")

    short = raw.isna().to_numpy()
    if short.any():
        row, col = (int(v) for v in np.argwhere(short)[0])
        raise DataError(
            f"{path} is not rectangular: expected {raw.shape[1]} fields",
            row=line_numbers[row],
            column=col + 1,
        )
    numeric = raw.apply(lambda col: pd.to_numeric(col.str.strip(), errors="coerce"))
    bad = numeric.isna().to_numpy() | ~np.isfinite(numeric.to_numpy(dtype=float))
    if bad.any():
        row, col = (int(v) for v in np.argwhere(bad)[0])
        raise DataError(
            f"cannot read {raw.iat[row, col]!r} in {path} as a finite number",
            row=line_numbers[row],
            column=col + 1,
        )
    numeric.columns = header
    numeric = numeric.astype(float)
    numeric.attrs["has_header"] = has_header
    logger.info("read %s: %d rows x %d columns", path, *numeric.shape)
    return numeric


def _response_position(frame: pd.DataFrame, response) -> int:
    if response is None:
        return frame.shape[1] - 1
    response = str(response)
    if response in frame.columns:
        return list(frame.columns).index(response)
    if response.isdigit() and 1 <= int(response) <= frame.shape[1]:
        return int(response) - 1
    raise DataError(f"no response column {response!r}; columns are 1..{frame.shape[1]} or {list(frame.columns)[:5]}...")


def read_table(path, response=None) -> Dataset:
    """Dataset with the response taken by name or 1-based index, the last column by default."""
    frame = read_frame(path)
    if frame.shape[1] < 2:
        raise DataError(f"{path} needs a response and at least one covariate")
    position = _response_position(frame, response)
    covariates = frame.iloc[:, [c for c in range(frame.shape[1]) if c != position]]
    if frame.attrs.get("has_header"):
        labels = tuple(str(c) for c in covariates.columns)
    else:
        labels = tuple(str(j + 1) for j in range(covariates.shape[1]))
    return Dataset(frame.iloc[:, position].to_numpy(), covariates.to_numpy(), labels)


def read_matrix(path) -> tuple[np.ndarray, tuple[str, ...]]:
    """All columns as covariates (graph input)."""
    frame = read_frame(path)
    return frame.to_numpy(), tuple(frame.columns)


def write_table(path, X, labels, y=None, response_label: str = "y") -> None:
    """Write covariates (and the response as the last column) with a header row, losslessly."""
    frame = pd.DataFrame(np.asarray(X, dtype=float), columns=list(labels))
    if y is not None:
        frame[response_label] = np.asarray(y, dtype=float)
    frame.to_csv(path, index=False, float_format="%.17g")
    logger.info("wrote %s: %d rows x %d columns", path, *frame.shape)
