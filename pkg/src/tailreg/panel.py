"""CSV ingestion.

One dialect only: comma separated, header row, UTF-8, ``.`` decimal point,
empty cell means missing. Rows with a missing value in any selected column
are dropped (the count is logged); the remaining rows keep file order.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InputError

log = logging.getLogger(__name__)


class ParseError(InputError):
    pass


class MissingColumn(InputError):
    pass


@dataclass(frozen=True, eq=False)
class Panel:
    response_name: str
    covariate_names: tuple[str, ...]
    response: np.ndarray
    covariates: np.ndarray  # n x p, no intercept
    index: tuple[str, ...]  # ordering key per kept row
    index_name: str | None = None
    dropped: int = 0

    @property
    def n(self) -> int:
        return self.response.shape[0]


def read_panel(path, response: str, covariates, index: str | None = None) -> Panel:
    covariates = tuple(covariates)
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh, delimiter=",")
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: file is empty") from None
        header = [h.strip() for h in header]
        wanted = [response, *covariates] + ([index] if index else [])
        for name in wanted:
            if name not in header:
                raise MissingColumn(f"column {name!r} not found in {path} (columns: {', '.join(header)})")
        if len(set(header)) != len(header):
            raise ParseError(f"{path}: duplicate column names in header")
        cols = [header.index(c) for c in (response, *covariates)]
        idx_col = header.index(index) if index else None

        values, keys, dropped = [], [], 0
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ParseError(f"{path}:{lineno}: expected {len(header)} fields, found {len(row)}")
            cells = [row[c].strip() for c in cols]
            if any(c == "" for c in cells):
                dropped += 1
                continue
            try:
                values.append([float(c) for c in cells])
            except ValueError:
                bad = next(c for c in cells if not _is_float(c))
                raise ParseError(f"{path}:{lineno}: cannot parse {bad!r} as a number") from None
            keys.append(row[idx_col] if idx_col is not None else str(lineno - 1))
    if dropped:
        log.warning("dropped %d row(s) with missing values in %s", dropped, path)
    arr = np.array(values, dtype=float).reshape(-1, 1 + len(covariates))
    if not np.all(np.isfinite(arr)):
        raise ParseError(f"{path}: non-finite numbers in selected columns")
    return Panel(
        response_name=response,
        covariate_names=covariates,
        response=arr[:, 0].copy(),
        covariates=arr[:, 1:].copy(),
        index=tuple(keys),
        index_name=index,
        dropped=dropped,
    )


def _is_float(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def write_dataset_csv(path, responses, covariates, names=None) -> None:
    """Write ``y`` and the non-intercept covariates with round-trip float formatting."""
    X = np.asarray(covariates, dtype=float)
    names = names or [f"x{j}" for j in range(2, X.shape[1] + 2)]
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["y", *names])
        for yi, row in zip(np.asarray(responses, dtype=float), X):
            writer.writerow([repr(float(yi)), *(repr(float(v)) for v in row)])
