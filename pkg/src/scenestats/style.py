"""Nine sequence style attributes: movement, orientation change, tempo, rhythm.

All attributes are first or second moments over per-step quantities along
the unit order.  Sums use compensated summation (math.fsum), so reordering
a sequence can never change a result through float addition order alone.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import fsum
from typing import Sequence

import numpy as np

from .ca import CorrespondenceEmbedding, orientation_matrix
from .errors import TooFewUnits

#: serialization order; attribute numbers 1..9 follow this tuple
ATTRIBUTE_NAMES = (
    "movement_mean",
    "movement_var",
    "orientation_mean",
    "orientation_var",
    "tempo_abs_mean",
    "tempo_signed_mean",
    "rhythm_mean",
    "rhythm_var",
    "rhythm_signed_mean",
)


@dataclass(frozen=True)
class StyleProfile:
    """The nine attribute values for one ordered unit sequence.

    Attributes 1-2: mean/variance of squared factor-space distance between
    consecutive units.  3-4: the same over squared signed-cosine differences.
    5-6: mean |length delta| and mean signed length delta.  7-9: mean,
    variance and sign-carrying mean of squared length deltas.  Variances are
    population variances; with only two units they are reported as 0 and
    ``short_series`` is set.
    """

    movement_mean: float
    movement_var: float
    orientation_mean: float
    orientation_var: float
    tempo_abs_mean: float
    tempo_signed_mean: float
    rhythm_mean: float
    rhythm_var: float
    rhythm_signed_mean: float
    lengths: tuple[int, ...]
    short_series: bool

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in ATTRIBUTE_NAMES])

    def as_dict(self) -> dict:
        return {
            "attributes": {
                str(i): {"name": name, "value": getattr(self, name)}
                for i, name in enumerate(ATTRIBUTE_NAMES, start=1)
            },
            "lengths": list(self.lengths),
            "short_series": self.short_series,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "StyleProfile":
        values = {}
        for i, name in enumerate(ATTRIBUTE_NAMES, start=1):
            rec = doc["attributes"][str(i)]
            if rec["name"] != name:
                raise ValueError(f"attribute {i} is {rec['name']!r}, expected {name!r}")
            values[name] = float(rec["value"])
        return cls(
            lengths=tuple(int(x) for x in doc["lengths"]),
            short_series=bool(doc["short_series"]),
            **values,
        )


def _mean(xs: list[float]) -> float:
    return fsum(xs) / len(xs)


def _variance(xs: list[float]) -> float:
    # population variance: the sequence is the whole population, not a sample
    m = _mean(xs)
    return fsum((x - m) ** 2 for x in xs) / len(xs)


def _apply_order(arr: np.ndarray, order) -> np.ndarray:
    if order is None:
        return arr
    idx = np.asarray(order, dtype=int)
    if idx.shape != (arr.shape[0],):
        raise ValueError(f"order must list all {arr.shape[0]} positions")
    return arr[idx]


def _step_squared_distances(coords: np.ndarray, order) -> list[float]:
    n = coords.shape[0]
    if n < 2:
        raise TooFewUnits(f"need at least 2 units, got {n}")
    seq = _apply_order(coords, order)
    steps = np.diff(seq, axis=0)
    return (steps * steps).sum(axis=1).tolist()


def movement_attrs(embedding: CorrespondenceEmbedding, order=None) -> tuple[float, float]:
    """Mean and variance of squared step distance in full factor space."""
    m = _step_squared_distances(embedding.row_coords, order)
    return _mean(m), (_variance(m) if len(m) >= 2 else 0.0)


def orientation_attrs(embedding: CorrespondenceEmbedding, order=None) -> tuple[float, float]:
    """Mean and variance of squared step change in signed-cosine orientation."""
    o = _step_squared_distances(orientation_matrix(embedding), order)
    return _mean(o), (_variance(o) if len(o) >= 2 else 0.0)


def _deltas(lengths, order) -> list[float]:
    arr = np.asarray(lengths, dtype=float)
    if arr.ndim != 1 or arr.shape[0] < 2:
        raise TooFewUnits(f"need at least 2 lengths, got shape {arr.shape}")
    seq = _apply_order(arr, order)
    return np.diff(seq).tolist()


def tempo_attrs(lengths: Sequence[int], order=None) -> tuple[float, float]:
    """Mean absolute and mean signed step change in unit length."""
    deltas = _deltas(lengths, order)
    return _mean([abs(d) for d in deltas]), _mean(deltas)


def rhythm_attrs(lengths: Sequence[int], order=None) -> tuple[float, float, float]:
    """Mean, variance and sign-carrying mean of squared length deltas."""
    deltas = _deltas(lengths, order)
    r = [d * d for d in deltas]
    signed = [d * d if d > 0 else (-(d * d) if d < 0 else 0.0) for d in deltas]
    return _mean(r), (_variance(r) if len(r) >= 2 else 0.0), _mean(signed)


def style_profile(
    embedding: CorrespondenceEmbedding,
    lengths: Sequence[int],
    order=None,
) -> StyleProfile:
    """Assemble all nine attributes for one ordering of the units."""
    n = embedding.row_coords.shape[0]
    if len(lengths) != n:
        raise ValueError(f"{len(lengths)} lengths for {n} embedded units")
    a1, a2 = movement_attrs(embedding, order)
    a3, a4 = orientation_attrs(embedding, order)
    a5, a6 = tempo_attrs(lengths, order)
    a7, a8, a9 = rhythm_attrs(lengths, order)
    ordered_lengths = _apply_order(np.asarray(lengths, dtype=int), order)
    return StyleProfile(
        movement_mean=a1,
        movement_var=a2,
        orientation_mean=a3,
        orientation_var=a4,
        tempo_abs_mean=a5,
        tempo_signed_mean=a6,
        rhythm_mean=a7,
        rhythm_var=a8,
        rhythm_signed_mean=a9,
        lengths=tuple(int(x) for x in ordered_lengths),
        short_series=n == 2,
    )
