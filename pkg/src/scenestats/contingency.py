"""Scene-by-word cross-tabulation feeding the chi-squared embedding."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DegenerateInput, EmptyAfterPrune
from .ingest import SceneUnit
from .io_utils import read_json, write_json_atomic, write_text_atomic

TABLE_SCHEMA = "scenestats/table/v1"

PRESENCE = "presence"
FREQUENCY = "frequency"


@dataclass(frozen=True, eq=False)
class ContingencyTable:
    """Units x vocabulary count table with stored marginals.

    In presence mode every entry is 0/1; in frequency mode entries are
    occurrence counts.  Column order is lexicographic so serialized tables
    are reproducible.
    """

    row_labels: tuple[int, ...]
    col_labels: tuple[str, ...]
    values: np.ndarray  # (n_rows, n_cols) int64, non-negative
    mode: str
    row_sums: np.ndarray
    col_sums: np.ndarray
    total: int

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_cols(self) -> int:
        return self.values.shape[1]

    def validate(self) -> None:
        if self.values.shape != (len(self.row_labels), len(self.col_labels)):
            raise ValueError("label/values shape mismatch")
        if (self.values < 0).any():
            raise ValueError("negative entry in contingency table")
        if not np.array_equal(self.row_sums, self.values.sum(axis=1)):
            raise ValueError("stored row sums disagree with values")
        if not np.array_equal(self.col_sums, self.values.sum(axis=0)):
            raise ValueError("stored column sums disagree with values")
        if self.total != int(self.values.sum()):
            raise ValueError("stored grand total disagrees with values")
        if self.mode == PRESENCE and (self.values > 1).any():
            raise ValueError("presence-mode table contains entries > 1")


def _finish(row_labels, col_labels, values, mode) -> ContingencyTable:
    table = ContingencyTable(
        row_labels=tuple(row_labels),
        col_labels=tuple(col_labels),
        values=values,
        mode=mode,
        row_sums=values.sum(axis=1),
        col_sums=values.sum(axis=0),
        total=int(values.sum()),
    )
    table.validate()
    return table


def build_table(units: Sequence[SceneUnit], mode: str = PRESENCE) -> ContingencyTable:
    """Cross-tabulate unit token lists against the combined vocabulary.

    Vocabulary is the union of tokens across units, sorted lexicographically.
    """
    if mode not in (PRESENCE, FREQUENCY):
        raise ValueError(f"unknown table mode {mode!r}")
    if len(units) < 2:
        raise DegenerateInput(f"need at least 2 units, got {len(units)}")
    vocab = sorted({tok for u in units for tok in u.tokens})
    if not vocab:
        raise DegenerateInput("combined vocabulary is empty")
    col_index = {w: j for j, w in enumerate(vocab)}
    values = np.zeros((len(units), len(vocab)), dtype=np.int64)
    for i, unit in enumerate(units):
        for tok, cnt in Counter(unit.tokens).items():
            values[i, col_index[tok]] = cnt
    if mode == PRESENCE:
        values = (values > 0).astype(np.int64)
    return _finish([u.index for u in units], vocab, values, mode)


def to_presence(table: ContingencyTable) -> ContingencyTable:
    """Binarize a table (identity on presence-mode input)."""
    values = (table.values > 0).astype(np.int64)
    return _finish(table.row_labels, table.col_labels, values, PRESENCE)


@dataclass(frozen=True)
class PruneLog:
    removed_rows: tuple[int, ...]  # row labels
    removed_cols: tuple[str, ...]  # words


def prune(table: ContingencyTable) -> tuple[ContingencyTable, PruneLog]:
    """Drop all-zero rows and columns; the chi-squared metric needs positive marginals."""
    keep_rows = table.row_sums > 0
    keep_cols = table.col_sums > 0
    log = PruneLog(
        removed_rows=tuple(lbl for lbl, k in zip(table.row_labels, keep_rows) if not k),
        removed_cols=tuple(lbl for lbl, k in zip(table.col_labels, keep_cols) if not k),
    )
    if not keep_rows.any() or not keep_cols.any():
        raise EmptyAfterPrune("no nonzero rows or columns remain")
    if keep_rows.all() and keep_cols.all():
        return table, log
    values = table.values[np.ix_(keep_rows, keep_cols)]
    pruned = _finish(
        [lbl for lbl, k in zip(table.row_labels, keep_rows) if k],
        [lbl for lbl, k in zip(table.col_labels, keep_cols) if k],
        values,
        table.mode,
    )
    return pruned, log


@dataclass(frozen=True)
class ZipfSummary:
    """Top word frequencies and the counts-of-counts marginal histogram."""

    ranked: tuple[tuple[str, int], ...]     # (word, count), count descending, ties lexicographic
    histogram: tuple[tuple[int, int], ...]  # (count, n_words), count descending


def zipf_summary(table: ContingencyTable, top_k: int | None = None) -> ZipfSummary:
    """Rank words by corpus frequency (requires a frequency-mode table)."""
    if table.mode != FREQUENCY:
        raise ValueError("zipf summary needs a frequency-mode table")
    pairs = sorted(
        zip(table.col_labels, (int(c) for c in table.col_sums)),
        key=lambda wc: (-wc[1], wc[0]),
    )
    if top_k is not None:
        pairs = pairs[:top_k]
    hist = Counter(int(c) for c in table.col_sums)
    histogram = tuple(sorted(hist.items(), key=lambda fc: -fc[0]))
    return ZipfSummary(ranked=tuple(pairs), histogram=histogram)


# ---------------------------------------------------------------------------
# serialization

def table_to_dict(table: ContingencyTable) -> dict:
    rows, cols = np.nonzero(table.values)
    entries = [
        [int(i), int(j), int(table.values[i, j])] for i, j in zip(rows.tolist(), cols.tolist())
    ]
    return {
        "schema": TABLE_SCHEMA,
        "mode": table.mode,
        "row_labels": list(table.row_labels),
        "col_labels": list(table.col_labels),
        "entries": entries,
    }


def table_from_dict(doc: dict) -> ContingencyTable:
    if doc.get("schema") != TABLE_SCHEMA:
        raise ValueError(f"not a table document (schema={doc.get('schema')!r})")
    n, m = len(doc["row_labels"]), len(doc["col_labels"])
    values = np.zeros((n, m), dtype=np.int64)
    for i, j, v in doc["entries"]:
        values[i, j] = v
    return _finish(doc["row_labels"], doc["col_labels"], values, doc["mode"])


def save_table(table: ContingencyTable, path: str | Path) -> None:
    write_json_atomic(path, table_to_dict(table))


def load_table(path: str | Path) -> ContingencyTable:
    return table_from_dict(read_json(path))


def table_to_delimited(table: ContingencyTable, delimiter: str = "\t") -> str:
    """Dense delimited export (header row of words, one line per unit); for debugging."""
    lines = [delimiter.join(["unit", *table.col_labels])]
    for label, row in zip(table.row_labels, table.values):
        lines.append(delimiter.join([str(label), *(str(int(v)) for v in row)]))
    return "\n".join(lines) + "\n"


def save_table_delimited(table: ContingencyTable, path: str | Path, delimiter: str = "\t") -> None:
    write_text_atomic(path, table_to_delimited(table, delimiter))
