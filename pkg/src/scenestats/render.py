"""Static figure emission: factor-plane scatters and sequence dendrograms.

Figures are drawn with matplotlib and saved as SVG with timestamps and
hashed ids pinned, so re-rendering the same artifact is byte-identical.
Each figure is accompanied by a delimited (TSV) dump of the plotted data;
dendrograms additionally get a Graphviz DOT rendering.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .ca import CorrespondenceEmbedding
from .cluster import Dendrogram
from .errors import InvalidK
from .io_utils import write_text_atomic

plt.rcParams["svg.hashsalt"] = "scenestats"  # deterministic SVG ids

_SVG_METADATA = {"Date": None}  # no timestamps: re-renders must be byte-identical


def _save_svg(fig, path: str | Path) -> None:
    fig.savefig(path, format="svg", metadata=_SVG_METADATA)
    plt.close(fig)


def render_factor_plane(
    embedding: CorrespondenceEmbedding,
    out_svg: str | Path,
    axes: tuple[int, int] = (1, 2),
    out_tsv: str | Path | None = None,
    title: str | None = None,
) -> None:
    """Scatter units (labeled by index) and words (unlabeled dots) on two factors."""
    a, b = axes
    if not (1 <= a <= embedding.n_factors and 1 <= b <= embedding.n_factors and a != b):
        raise InvalidK(
            f"axes {axes} not available; embedding retains {embedding.n_factors} factor(s)"
        )
    ax_a, ax_b = a - 1, b - 1
    fig, ax = plt.subplots(figsize=(8.0, 6.0))
    ax.scatter(
        embedding.col_coords[:, ax_a],
        embedding.col_coords[:, ax_b],
        s=6,
        c="0.65",
        marker=".",
        linewidths=0,
        zorder=1,
    )
    for label, x, y in zip(
        embedding.row_labels,
        embedding.row_coords[:, ax_a],
        embedding.row_coords[:, ax_b],
    ):
        ax.annotate(
            str(label), (x, y), color="tab:red", fontsize=10, fontweight="bold",
            ha="center", va="center", zorder=2,
        )
    ax.axhline(0.0, color="0.8", linewidth=0.8, zorder=0)
    ax.axvline(0.0, color="0.8", linewidth=0.8, zorder=0)
    ax.set_xlabel(f"Factor {a} ({embedding.percent_inertia[ax_a]:.1f}% of inertia)")
    ax.set_ylabel(f"Factor {b} ({embedding.percent_inertia[ax_b]:.1f}% of inertia)")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    _save_svg(fig, out_svg)
    if out_tsv is not None:
        write_text_atomic(out_tsv, factor_plane_tsv(embedding, axes))


def factor_plane_tsv(embedding: CorrespondenceEmbedding, axes: tuple[int, int]) -> str:
    a, b = axes
    lines = [f"kind\tlabel\tfactor_{a}\tfactor_{b}"]
    for label, row in zip(embedding.row_labels, embedding.row_coords):
        lines.append(f"unit\t{label}\t{row[a - 1]!r}\t{row[b - 1]!r}")
    for label, col in zip(embedding.col_labels, embedding.col_coords):
        lines.append(f"word\t{label}\t{col[a - 1]!r}\t{col[b - 1]!r}")
    return "\n".join(lines) + "\n"


def render_dendrogram(
    dendrogram: Dendrogram,
    out_svg: str | Path,
    labels: list[str] | None = None,
    out_tsv: str | Path | None = None,
    title: str | None = None,
) -> None:
    """Draw the hierarchy with height-proportional branches, leaves in sequence order."""
    n = dendrogram.leaf_count
    if labels is None:
        labels = [str(i) for i in range(1, n + 1)]
    fig, ax = plt.subplots(figsize=(max(6.0, 0.22 * n + 2.0), 5.0))
    x_pos: dict[tuple[int, int], float] = {(i, i): float(i) for i in range(1, n + 1)}
    heights: dict[tuple[int, int], float] = {(i, i): 0.0 for i in range(1, n + 1)}
    for m in dendrogram.merges:
        lx = x_pos.pop((m.left_start, m.left_end))
        rx = x_pos.pop((m.right_start, m.right_end))
        lh = heights.pop((m.left_start, m.left_end))
        rh = heights.pop((m.right_start, m.right_end))
        ax.plot([lx, lx], [lh, m.height], color="black", linewidth=1.0)
        ax.plot([rx, rx], [rh, m.height], color="black", linewidth=1.0)
        ax.plot([lx, rx], [m.height, m.height], color="black", linewidth=1.0)
        key = (m.left_start, m.right_end)
        x_pos[key] = 0.5 * (lx + rx)
        heights[key] = m.height
    ax.set_xticks(range(1, n + 1))
    ax.set_xticklabels(labels, fontsize=7, rotation=90 if n > 30 else 0)
    ax.set_ylabel("complete-link distance")
    ax.set_xlim(0.0, n + 1.0)
    ax.spines["top"].set_visible(False)
    ax.spines["right"].set_visible(False)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    _save_svg(fig, out_svg)
    if out_tsv is not None:
        write_text_atomic(out_tsv, merges_tsv(dendrogram))


def merges_tsv(dendrogram: Dendrogram) -> str:
    lines = ["merge\tleft_start\tleft_end\tright_start\tright_end\theight"]
    for k, m in enumerate(dendrogram.merges, start=1):
        lines.append(
            f"{k}\t{m.left_start}\t{m.left_end}\t{m.right_start}\t{m.right_end}\t{m.height!r}"
        )
    return "\n".join(lines) + "\n"


def dendrogram_to_dot(dendrogram: Dendrogram, labels: list[str] | None = None) -> str:
    """Graphviz DOT rendering of the merge tree (heights on internal nodes)."""
    n = dendrogram.leaf_count
    if labels is None:
        labels = [str(i) for i in range(1, n + 1)]
    lines = [
        "graph dendrogram {",
        "  node [fontsize=10];",
        '  edge [color="gray40"];',
    ]
    for i, label in enumerate(labels, start=1):
        lines.append(f'  leaf{i} [label="{label}", shape=plaintext];')
    node_of: dict[tuple[int, int], str] = {(i, i): f"leaf{i}" for i in range(1, n + 1)}
    for k, m in enumerate(dendrogram.merges, start=1):
        name = f"merge{k}"
        lines.append(f'  {name} [label="{m.height:.6g}", shape=box];')
        left = node_of.pop((m.left_start, m.left_end))
        right = node_of.pop((m.right_start, m.right_end))
        lines.append(f"  {name} -- {left};")
        lines.append(f"  {name} -- {right};")
        node_of[(m.left_start, m.right_end)] = name
    lines.append("}")
    return "\n".join(lines) + "\n"


def save_dot(dendrogram: Dendrogram, path: str | Path, labels: list[str] | None = None) -> None:
    write_text_atomic(path, dendrogram_to_dot(dendrogram, labels))
