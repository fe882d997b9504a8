"""Single-file analysis bundle binding one script's derived artifacts.

A bundle records the pruned table, the row-side embedding summary, the
dendrogram, the style profile and (once run) the randomization report,
keyed by a content hash of the source.  The config snapshot plus the table
are sufficient to recompute everything else bit-identically, which is how
the full embedding (including word coordinates) is rebuilt on demand for
rendering without bloating the bundle file.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import cached_property
from pathlib import Path
from typing import Sequence

from .ca import CorrespondenceEmbedding, embed, make_profiles
from .cluster import Dendrogram, cluster, cluster_by_orientation, dendrogram_from_dict, dendrogram_to_dict
from .contingency import (
    FREQUENCY,
    PRESENCE,
    ContingencyTable,
    build_table,
    prune,
    table_from_dict,
    table_to_dict,
    to_presence,
    zipf_summary,
)
from .ingest import FormatProfile, SceneUnit, split_scenes, tokenize, units_to_dict
from .io_utils import dumps_canonical, read_json, sha256_text, write_text_atomic
from .randomize import RandomizationReport, report_from_dict, report_to_dict
from .style import StyleProfile, style_profile

BUNDLE_SCHEMA = "scenestats/bundle/v1"

POINTS_CORRELATIONS = "correlations"
POINTS_PROJECTIONS = "projections"


@dataclass(frozen=True, eq=False)
class AnalysisBundle:
    script: str
    sha256: str
    config: dict
    n_units: int                      # parsed units, before pruning
    lengths: tuple[int, ...]          # token counts aligned with table rows
    zipf_top: tuple[tuple[str, int], ...]
    table: ContingencyTable           # pruned analysis table
    removed_rows: tuple[int, ...]
    removed_cols: tuple[str, ...]
    embedding_summary: dict           # row-side record, serialized verbatim
    dendrogram: Dendrogram
    style: StyleProfile
    report: RandomizationReport | None = None

    @property
    def vocab_size(self) -> int:
        return self.table.n_cols

    @cached_property
    def embedding(self) -> CorrespondenceEmbedding:
        """Full embedding (word coordinates included), recomputed from the table."""
        return embed(make_profiles(self.table))

    def with_report(self, report: RandomizationReport) -> "AnalysisBundle":
        return replace(self, report=report)


def _embedding_summary(emb: CorrespondenceEmbedding) -> dict:
    return {
        "eigenvalues": emb.eigenvalues.tolist(),
        "inertia_total": emb.inertia_total,
        "percent_inertia": emb.percent_inertia.tolist(),
        "row_projections": emb.row_coords.tolist(),
        "row_correlations": emb.row_correlations.tolist(),
        "row_squared_cosines": emb.row_squared_cosines.tolist(),
        "zero_norm_rows": list(emb.zero_norm_rows),
    }


def analyze_units(
    units: Sequence[SceneUnit],
    *,
    script_name: str,
    source_hash: str | None = None,
    mode: str = PRESENCE,
    points: str = POINTS_CORRELATIONS,
    top_k: int = 20,
    config: dict | None = None,
) -> AnalysisBundle:
    """Run the full table -> embedding -> clustering -> style pipeline.

    Units must already be tokenized.  The frequency table is built once;
    presence mode binarizes it, so both views agree cell for cell.
    """
    if points not in (POINTS_CORRELATIONS, POINTS_PROJECTIONS):
        raise ValueError(f"unknown points choice {points!r}")
    freq_table = build_table(units, FREQUENCY)
    zipf = zipf_summary(freq_table, top_k)
    work = to_presence(freq_table) if mode == PRESENCE else freq_table
    pruned, log = prune(work)

    length_by_label = {u.index: u.length for u in units}
    lengths = tuple(length_by_label[lbl] for lbl in pruned.row_labels)

    emb = embed(make_profiles(pruned))
    if points == POINTS_CORRELATIONS:
        dend = cluster_by_orientation(emb)
    else:
        dend = cluster(emb.row_coords)
    style = style_profile(emb, lengths)

    snapshot = {"mode": mode, "points": points, "top_k": top_k}
    if config:
        snapshot.update(config)
    bundle = AnalysisBundle(
        script=script_name,
        sha256=source_hash or sha256_text(dumps_canonical(units_to_dict(units))),
        config=snapshot,
        n_units=len(units),
        lengths=lengths,
        zipf_top=zipf.ranked,
        table=pruned,
        removed_rows=log.removed_rows,
        removed_cols=log.removed_cols,
        embedding_summary=_embedding_summary(emb),
        dendrogram=dend,
        style=style,
    )
    bundle.__dict__["embedding"] = emb  # pre-seed the cached property
    return bundle


def analyze_text(
    raw_text: str,
    profile: FormatProfile,
    *,
    script_name: str,
    include_headings: bool = True,
    mode: str = PRESENCE,
    points: str = POINTS_CORRELATIONS,
    top_k: int = 20,
    config: dict | None = None,
) -> tuple[list[SceneUnit], AnalysisBundle]:
    """Parse, tokenize and analyze raw script text in one call."""
    units = [tokenize(u, include_heading=include_headings) for u in split_scenes(raw_text, profile)]
    snapshot = {"profile": profile.name, "include_headings": include_headings}
    if config:
        snapshot.update(config)
    bundle = analyze_units(
        units,
        script_name=script_name,
        source_hash=sha256_text(raw_text),
        mode=mode,
        points=points,
        top_k=top_k,
        config=snapshot,
    )
    return units, bundle


# ---------------------------------------------------------------------------
# serialization

def bundle_to_dict(bundle: AnalysisBundle) -> dict:
    return {
        "schema": BUNDLE_SCHEMA,
        "script": bundle.script,
        "sha256": bundle.sha256,
        "config": bundle.config,
        "n_units": bundle.n_units,
        "lengths": list(bundle.lengths),
        "zipf_top": [[w, c] for w, c in bundle.zipf_top],
        "table_summary": {
            "n_rows": bundle.table.n_rows,
            "vocab_size": bundle.vocab_size,
            "removed_rows": list(bundle.removed_rows),
            "removed_cols": list(bundle.removed_cols),
        },
        "table": table_to_dict(bundle.table),
        "embedding_summary": bundle.embedding_summary,
        "dendrogram": dendrogram_to_dict(bundle.dendrogram),
        "style": bundle.style.as_dict(),
        "randomization": report_to_dict(bundle.report) if bundle.report else None,
    }


def bundle_from_dict(doc: dict) -> AnalysisBundle:
    if doc.get("schema") != BUNDLE_SCHEMA:
        raise ValueError(f"not an analysis bundle (schema={doc.get('schema')!r})")
    randomization = doc.get("randomization")
    return AnalysisBundle(
        script=doc["script"],
        sha256=doc["sha256"],
        config=dict(doc["config"]),
        n_units=int(doc["n_units"]),
        lengths=tuple(int(x) for x in doc["lengths"]),
        zipf_top=tuple((w, int(c)) for w, c in doc["zipf_top"]),
        table=table_from_dict(doc["table"]),
        removed_rows=tuple(doc["table_summary"]["removed_rows"]),
        removed_cols=tuple(doc["table_summary"]["removed_cols"]),
        embedding_summary=doc["embedding_summary"],
        dendrogram=dendrogram_from_dict(doc["dendrogram"]),
        style=StyleProfile.from_dict(doc["style"]),
        report=report_from_dict(randomization) if randomization else None,
    )


def dumps_bundle(bundle: AnalysisBundle) -> str:
    return dumps_canonical(bundle_to_dict(bundle))


def save_bundle(bundle: AnalysisBundle, path: str | Path) -> None:
    write_text_atomic(path, dumps_bundle(bundle))


def load_bundle(path: str | Path) -> AnalysisBundle:
    return bundle_from_dict(read_json(path))
