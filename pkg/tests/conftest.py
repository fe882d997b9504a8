"""Shared builders for synthetic corpora, tables and embeddings."""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))  # make `reference` importable

from scenestats.ca import CorrespondenceEmbedding
from scenestats.contingency import PRESENCE, ContingencyTable
from scenestats.ingest import SceneUnit

DATA_DIR = Path(__file__).parent / "data"


def make_table(values, mode=PRESENCE) -> ContingencyTable:
    """Build a table directly from a count matrix (labels synthesized)."""
    values = np.asarray(values, dtype=np.int64)
    n, m = values.shape
    return ContingencyTable(
        row_labels=tuple(range(1, n + 1)),
        col_labels=tuple(f"w{j:03d}" for j in range(m)),
        values=values,
        mode=mode,
        row_sums=values.sum(axis=1),
        col_sums=values.sum(axis=0),
        total=int(values.sum()),
    )


def random_pruned_table(rng, max_rows=20, max_cols=40, max_entry=5) -> ContingencyTable:
    """Random count table with all-zero rows/columns already removed."""
    from scenestats.contingency import prune

    while True:
        n = int(rng.integers(2, max_rows + 1))
        m = int(rng.integers(2, max_cols + 1))
        values = rng.integers(0, max_entry + 1, size=(n, m))
        if values.sum() == 0:
            continue
        keep_r = values.sum(axis=1) > 0
        keep_c = values.sum(axis=0) > 0
        if keep_r.sum() < 2 or keep_c.sum() < 2:
            continue
        table, _ = prune(make_table(values, mode="frequency"))
        return table


def units_from_token_lists(token_lists) -> list[SceneUnit]:
    return [
        SceneUnit(index=i + 1, heading="", body="", tokens=tuple(toks))
        for i, toks in enumerate(token_lists)
    ]


def random_units(rng, n_units=8, vocab=24, min_len=4, max_len=20) -> list[SceneUnit]:
    words = [f"w{j:03d}" for j in range(vocab)]
    lists = []
    for _ in range(n_units):
        size = int(rng.integers(min_len, max_len + 1))
        lists.append([words[int(k)] for k in rng.integers(0, vocab, size=size)])
    return units_from_token_lists(lists)


def fake_embedding(coords, correlations=None) -> CorrespondenceEmbedding:
    """Minimal embedding carrying given row coordinates (for style-metric tests)."""
    coords = np.asarray(coords, dtype=float)
    if coords.ndim == 1:
        coords = coords[:, None]
    n, nf = coords.shape
    if correlations is None:
        norms = np.sqrt((coords**2).sum(axis=1))
        correlations = np.zeros_like(coords)
        nz = norms > 0
        correlations[nz] = coords[nz] / norms[nz, None]
        zero_rows = tuple(int(i) for i in np.nonzero(~nz)[0])
    else:
        correlations = np.asarray(correlations, dtype=float)
        zero_rows = ()
    lam = np.ones(nf)
    return CorrespondenceEmbedding(
        eigenvalues=lam,
        inertia_total=float(lam.sum()),
        percent_inertia=100.0 * lam / lam.sum() if nf else np.zeros(0),
        row_coords=coords,
        col_coords=np.zeros((1, nf)),
        row_masses=np.full(n, 1.0 / n),
        col_masses=np.ones(1),
        row_correlations=correlations,
        row_squared_cosines=correlations**2,
        col_correlations=np.zeros((1, nf)),
        zero_norm_rows=zero_rows,
        zero_norm_cols=(),
        row_labels=tuple(range(1, n + 1)),
        col_labels=("w000",),
    )


def synthetic_script(n_scenes=12, seed=0, lengths=None, bracketed=False) -> str:
    """Deterministic master-scene script; optional target body word counts."""
    rng = np.random.default_rng(seed)
    pool = [
        "rick", "ilsa", "laszlo", "renault", "visa", "cafe", "letter", "plane",
        "market", "night", "gun", "paris", "song", "toast", "glance", "door",
        "whisky", "fog", "airport", "piano", "crowd", "secret", "papers", "exit",
    ]
    places = ["CAFE", "MARKET", "OFFICE", "AIRPORT", "STREET", "HANGAR", "BAZAAR"]
    times = ["NIGHT", "DAY"]
    lines = []
    for i in range(n_scenes):
        place = places[i % len(places)]
        tod = times[i % len(times)]
        heading = f"INT. {place} {i + 1} - {tod}"
        if bracketed:
            heading = f"[{heading}]"
        lines.append(heading)
        lines.append("")
        n_words = int(lengths[i]) if lengths is not None else int(rng.integers(8, 40))
        words = [pool[int(k)] for k in rng.integers(0, len(pool), size=n_words)]
        for start in range(0, len(words), 10):
            lines.append(" ".join(words[start : start + 10]))
        lines.append("")
    return "\n".join(lines) + "\n"
