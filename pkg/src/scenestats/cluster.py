"""Order-preserving complete-link agglomeration over a unit sequence.

Only sequence-adjacent clusters may merge, so every cluster is a contiguous
interval of the original order.  Cluster dissimilarity is the complete-link
criterion (greatest pairwise member distance, plain Euclidean), under which
the agglomeration heights are guaranteed free of inversions.

The merge search runs on a nearest-neighbor chain restricted to interval
neighbors, with complete-link distances maintained for all active cluster
pairs (quadratic time and space); records are then ordered by height, which
is exactly the order the stepwise minimal-pair algorithm would produce.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .ca import CorrespondenceEmbedding, orientation_matrix
from .errors import DimensionMismatch, InvalidK, TooFewUnits
from .io_utils import read_json, write_json_atomic

DENDROGRAM_SCHEMA = "scenestats/dendrogram/v1"


@dataclass(frozen=True)
class Merge:
    """One agglomeration: two adjacent intervals (1-based, inclusive) and its height."""

    left_start: int
    left_end: int
    right_start: int
    right_end: int
    height: float


@dataclass(frozen=True)
class Dendrogram:
    """Ordered-leaf hierarchy: n-1 merges with non-decreasing heights."""

    leaf_count: int
    merges: tuple[Merge, ...]

    def heights(self) -> list[float]:
        return [m.height for m in self.merges]


def _as_points(points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2:
        raise DimensionMismatch(f"expected per-unit vectors, got ndim={pts.ndim}")
    return pts


def cluster(points) -> Dendrogram:
    """Agglomerate the ordered vector sequence into a dendrogram.

    ``points`` is an (n, d) array-like of per-unit vectors (factor
    projections or orientation vectors); scalars are treated as 1-D points.
    """
    try:
        pts = _as_points(points)
    except ValueError as exc:  # ragged nested sequences
        raise DimensionMismatch(str(exc)) from exc
    n = pts.shape[0]
    if n < 2:
        raise TooFewUnits(f"clustering needs at least 2 units, got {n}")

    diff = pts[:, None, :] - pts[None, :, :]
    dist = np.sqrt((diff * diff).sum(axis=-1))

    # interval clusters as a doubly linked list over positions 0..n-1;
    # a merge keeps the left cluster's id and absorbs the right one
    start = list(range(n))
    end = list(range(n))
    left_nb = [i - 1 for i in range(n)]
    right_nb = [i + 1 for i in range(n)]
    right_nb[n - 1] = -1
    head = 0

    raw: list[Merge] = []
    chain: list[int] = []
    active = n
    while active > 1:
        if not chain:
            chain.append(head)
        c = chain[-1]
        # nearest adjacent neighbor; ties prefer the left (smaller index) side
        best, best_d = -1, np.inf
        for nb in (left_nb[c], right_nb[c]):
            if nb != -1 and dist[c, nb] < best_d:
                best, best_d = nb, dist[c, nb]
        if len(chain) >= 2 and best == chain[-2]:
            left, right = (best, c) if start[best] < start[c] else (c, best)
            raw.append(
                Merge(
                    left_start=start[left] + 1,
                    left_end=end[left] + 1,
                    right_start=start[right] + 1,
                    right_end=end[right] + 1,
                    height=float(best_d),
                )
            )
            # complete-link update against every other active cluster
            x = head
            while x != -1:
                if x != left and x != right:
                    d = max(dist[left, x], dist[right, x])
                    dist[left, x] = dist[x, left] = d
                x = right_nb[x]
            end[left] = end[right]
            right_nb[left] = right_nb[right]
            if right_nb[right] != -1:
                left_nb[right_nb[right]] = left
            chain.pop()
            chain.pop()
            active -= 1
        else:
            chain.append(best)

    # chain order already respects cluster formation; a stable sort by height
    # recovers the stepwise minimal-pair order without breaking that respect
    merges = tuple(sorted(raw, key=lambda m: m.height))
    heights = [m.height for m in merges]
    if any(a > b for a, b in zip(heights, heights[1:])):
        raise AssertionError("inversion in agglomeration heights")  # pragma: no cover
    return Dendrogram(leaf_count=n, merges=merges)


def cluster_by_orientation(embedding: CorrespondenceEmbedding) -> Dendrogram:
    """Cluster units by their full-dimensional signed-cosine vectors.

    Orientation captures the direction of movement through the factor space,
    which separates narrative change points far more sharply than raw
    positions do.
    """
    return cluster(orientation_matrix(embedding))


def cut(dendrogram: Dendrogram, k: int) -> list[tuple[int, int]]:
    """Partition the sequence into k contiguous segments.

    Removes the k-1 highest merges (ties resolved toward later merges) and
    returns the surviving intervals as 1-based inclusive (start, end) pairs.
    """
    n = dendrogram.leaf_count
    if not 1 <= k <= n:
        raise InvalidK(f"segment count {k} outside 1..{n}")
    seg_end = {i: i for i in range(1, n + 1)}
    for m in dendrogram.merges[: n - k]:
        seg_end[m.left_start] = m.right_end
        del seg_end[m.right_start]
    return sorted(seg_end.items())


def to_newick(dendrogram: Dendrogram, labels: list[str] | None = None) -> str:
    """Newick text with branch lengths derived from agglomeration heights."""
    n = dendrogram.leaf_count
    if labels is None:
        labels = [str(i) for i in range(1, n + 1)]
    if len(labels) != n:
        raise ValueError(f"need {n} labels, got {len(labels)}")
    safe = [_newick_safe(lbl) for lbl in labels]
    nodes: dict[tuple[int, int], tuple[str, float]] = {
        (i, i): (safe[i - 1], 0.0) for i in range(1, n + 1)
    }
    for m in dendrogram.merges:
        l_txt, l_h = nodes.pop((m.left_start, m.left_end))
        r_txt, r_h = nodes.pop((m.right_start, m.right_end))
        txt = f"({l_txt}:{_fmt(m.height - l_h)},{r_txt}:{_fmt(m.height - r_h)})"
        nodes[(m.left_start, m.right_end)] = (txt, m.height)
    (root_txt, _), = nodes.values()
    return root_txt + ";"


def _newick_safe(label: str) -> str:
    return "".join("_" if ch in "(),:;[] \t'" else ch for ch in label)


def _fmt(x: float) -> str:
    return f"{x:.12g}"


# ---------------------------------------------------------------------------
# serialization

def dendrogram_to_dict(dendrogram: Dendrogram) -> dict:
    return {
        "schema": DENDROGRAM_SCHEMA,
        "leaf_count": dendrogram.leaf_count,
        "merges": [
            {
                "left": [m.left_start, m.left_end],
                "right": [m.right_start, m.right_end],
                "height": m.height,
            }
            for m in dendrogram.merges
        ],
    }


def dendrogram_from_dict(doc: dict) -> Dendrogram:
    if doc.get("schema") != DENDROGRAM_SCHEMA:
        raise ValueError(f"not a dendrogram document (schema={doc.get('schema')!r})")
    merges = tuple(
        Merge(
            left_start=int(m["left"][0]),
            left_end=int(m["left"][1]),
            right_start=int(m["right"][0]),
            right_end=int(m["right"][1]),
            height=float(m["height"]),
        )
        for m in doc["merges"]
    )
    dend = Dendrogram(leaf_count=int(doc["leaf_count"]), merges=merges)
    _validate(dend)
    return dend


def _validate(dend: Dendrogram) -> None:
    n = dend.leaf_count
    if len(dend.merges) != n - 1:
        raise ValueError(f"expected {n - 1} merges, got {len(dend.merges)}")
    prev = -np.inf
    for m in dend.merges:
        if m.right_start != m.left_end + 1:
            raise ValueError(f"non-adjacent merge {m}")
        if not (1 <= m.left_start <= m.left_end < m.right_start <= m.right_end <= n):
            raise ValueError(f"merge ranges out of order: {m}")
        if m.height < prev:
            raise ValueError(f"inversion: height {m.height} after {prev}")
        prev = m.height
    if dend.merges and (dend.merges[-1].left_start != 1 or dend.merges[-1].right_end != n):
        raise ValueError("final merge does not cover the whole sequence")


def save_dendrogram(dendrogram: Dendrogram, path: str | Path) -> None:
    write_json_atomic(path, dendrogram_to_dict(dendrogram))


def load_dendrogram(path: str | Path) -> Dendrogram:
    return dendrogram_from_dict(read_json(path))
