"""Chi-squared metric embedding of the cross-tabulation.

Counts become relative frequencies; each unit's row profile is a point with
mass in a cloud endowed with the chi-squared metric.  A singular value
decomposition of the standardized residuals yields factor projections whose
plain Euclidean distances reproduce the chi-squared distances exactly, with
the cloud's inertia decomposed across factors in decreasing order.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .contingency import ContingencyTable
from .errors import NumericalFailure, ZeroMass, ZeroNormRow
from .io_utils import read_json, write_json_atomic

log = logging.getLogger(__name__)

EMBEDDING_SCHEMA = "scenestats/embedding/v1"

# Factors with eigenvalue below RELATIVE_FACTOR_TOL * lambda_1 are numerical
# zeros.  The absolute floor guards tables whose whole spectrum is rounding
# noise (rows and columns independent): integer tables can't produce genuine
# eigenvalues anywhere near it.
RELATIVE_FACTOR_TOL = 1e-12
ABSOLUTE_FACTOR_FLOOR = 1e-24

# A row whose projection norm is this far below the largest norm sits at the
# origin for all practical purposes and has no orientation.
ZERO_NORM_REL_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class ProfileCloud:
    """Relative frequencies, masses and row profiles of a pruned table."""

    freq: np.ndarray          # f_ij, sums to 1
    row_masses: np.ndarray    # f_i
    col_masses: np.ndarray    # f_j
    row_profiles: np.ndarray  # each row of freq rescaled to sum 1
    row_labels: tuple[int, ...]
    col_labels: tuple[str, ...]

    @property
    def n_rows(self) -> int:
        return self.freq.shape[0]

    @property
    def n_cols(self) -> int:
        return self.freq.shape[1]


def make_profiles(table: ContingencyTable) -> ProfileCloud:
    """Normalize a pruned table into relative frequencies and row profiles."""
    freq = table.values / table.total
    row_masses = table.row_sums / table.total
    col_masses = table.col_sums / table.total
    if (row_masses <= 0).any() or (col_masses <= 0).any():
        raise ZeroMass("zero row or column mass; prune the table first")
    row_profiles = freq / row_masses[:, None]
    return ProfileCloud(
        freq=freq,
        row_masses=row_masses,
        col_masses=col_masses,
        row_profiles=row_profiles,
        row_labels=table.row_labels,
        col_labels=table.col_labels,
    )


def total_inertia(cloud: ProfileCloud) -> float:
    """Mass-weighted squared deviation of the cloud from row/column independence.

    Zero exactly when every cell equals the product of its marginals.
    """
    expected = np.outer(cloud.row_masses, cloud.col_masses)
    return float((((cloud.freq - expected) ** 2) / expected).sum())


def chi2_distance(cloud: ProfileCloud, i: int, i_prime: int) -> float:
    """Squared chi-squared distance between the profiles of rows i and i'."""
    diff = cloud.row_profiles[i] - cloud.row_profiles[i_prime]
    return float((diff * diff / cloud.col_masses).sum())


def chi2_distances(cloud: ProfileCloud) -> np.ndarray:
    """Full matrix of pairwise squared chi-squared row distances."""
    scaled = cloud.row_profiles / np.sqrt(cloud.col_masses)
    diff = scaled[:, None, :] - scaled[None, :, :]
    return (diff * diff).sum(axis=-1)


@dataclass(frozen=True, eq=False)
class CorrespondenceEmbedding:
    """Factor-space coordinates of rows and columns plus inertia accounting.

    ``row_coords``/``col_coords`` hold projections on the retained factors
    (eigenvalues non-increasing).  ``row_correlations`` are signed cosines of
    each row's full-dimensional projection with each axis; their squares are
    the squared cosines and sum to 1 per non-degenerate row.
    """

    eigenvalues: np.ndarray        # (N,), non-increasing
    inertia_total: float           # direct summation over the cloud
    percent_inertia: np.ndarray    # (N,), sums to 100 when N > 0
    row_coords: np.ndarray         # (n, N)
    col_coords: np.ndarray         # (m, N)
    row_masses: np.ndarray
    col_masses: np.ndarray
    row_correlations: np.ndarray   # (n, N) signed cosines, zero rows for degenerate units
    row_squared_cosines: np.ndarray
    col_correlations: np.ndarray   # (m, N)
    zero_norm_rows: tuple[int, ...]
    zero_norm_cols: tuple[int, ...]
    row_labels: tuple[int, ...]
    col_labels: tuple[str, ...]

    @property
    def n_rows(self) -> int:
        return self.row_coords.shape[0]

    @property
    def n_factors(self) -> int:
        return self.row_coords.shape[1]


def _zero_norm_mask(norms: np.ndarray) -> np.ndarray:
    if norms.size == 0:
        return np.zeros(0, dtype=bool)
    top = norms.max()
    return norms <= top * ZERO_NORM_REL_TOL


def _signed_cosines(coords: np.ndarray, norms: np.ndarray, mask: np.ndarray) -> np.ndarray:
    out = np.zeros_like(coords)
    keep = ~mask
    if coords.shape[1]:
        out[keep] = coords[keep] / norms[keep, None]
    return out


def embed(cloud: ProfileCloud) -> CorrespondenceEmbedding:
    """Factor the profile cloud via SVD of the standardized residuals.

    Euclidean distances between row projections reproduce pairwise
    chi-squared distances; the eigenvalue sum reproduces the total inertia.
    Factors below tolerance are dropped; a uniform (independent) table
    retains no factors at all.
    """
    r, c = cloud.row_masses, cloud.col_masses
    expected = np.outer(r, c)
    residuals = (cloud.freq - expected) / np.sqrt(expected)
    try:
        u, s, vt = np.linalg.svd(residuals, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(
            f"SVD did not converge on a {cloud.n_rows}x{cloud.n_cols} table "
            f"(mass range rows [{r.min():.3g}, {r.max():.3g}], "
            f"cols [{c.min():.3g}, {c.max():.3g}])"
        ) from exc

    # centering against the marginal product costs one dimension
    n_max = min(cloud.n_rows, cloud.n_cols) - 1
    s = s[:n_max]
    lam = s**2
    if lam.size and lam[0] > ABSOLUTE_FACTOR_FLOOR:
        keep = lam > max(lam[0] * RELATIVE_FACTOR_TOL, ABSOLUTE_FACTOR_FLOOR)
    else:
        keep = np.zeros(lam.size, dtype=bool)
    s, lam = s[keep], lam[keep]
    u = u[:, :n_max][:, keep]
    vt = vt[:n_max][keep]

    row_coords = (u * s) / np.sqrt(r)[:, None]
    col_coords = (vt.T * s) / np.sqrt(c)[:, None]

    # deterministic axis signs: the row of largest |projection| points positive
    for a in range(row_coords.shape[1]):
        i_star = int(np.argmax(np.abs(row_coords[:, a])))
        if row_coords[i_star, a] < 0:
            row_coords[:, a] = -row_coords[:, a]
            col_coords[:, a] = -col_coords[:, a]

    row_norms = np.sqrt((row_coords**2).sum(axis=1))
    col_norms = np.sqrt((col_coords**2).sum(axis=1))
    row_zero = _zero_norm_mask(row_norms)
    col_zero = _zero_norm_mask(col_norms)
    row_corr = _signed_cosines(row_coords, row_norms, row_zero)
    col_corr = _signed_cosines(col_coords, col_norms, col_zero)
    if lam.size and row_zero.any():
        log.warning(
            "%d unit(s) project at the origin and carry no orientation: rows %s",
            int(row_zero.sum()),
            [cloud.row_labels[i] for i in np.nonzero(row_zero)[0]],
        )

    lam_sum = lam.sum()
    percent = 100.0 * lam / lam_sum if lam.size else np.zeros(0)
    return CorrespondenceEmbedding(
        eigenvalues=lam,
        inertia_total=total_inertia(cloud),
        percent_inertia=percent,
        row_coords=row_coords,
        col_coords=col_coords,
        row_masses=r.copy(),
        col_masses=c.copy(),
        row_correlations=row_corr,
        row_squared_cosines=row_corr**2,
        col_correlations=col_corr,
        zero_norm_rows=tuple(int(i) for i in np.nonzero(row_zero)[0]),
        zero_norm_cols=tuple(int(j) for j in np.nonzero(col_zero)[0]),
        row_labels=cloud.row_labels,
        col_labels=cloud.col_labels,
    )


def correlations(embedding: CorrespondenceEmbedding, i: int) -> np.ndarray:
    """Signed cosine of row i with every factor; squares sum to 1."""
    if embedding.n_factors == 0 or i in embedding.zero_norm_rows:
        raise ZeroNormRow(f"unit row {i} projects at the origin; no orientation defined")
    return embedding.row_correlations[i].copy()


def orientation_matrix(embedding: CorrespondenceEmbedding) -> np.ndarray:
    """All rows' signed-cosine vectors; raises if any row is degenerate."""
    if embedding.n_factors == 0:
        raise ZeroNormRow("embedding retains no factors; no orientation defined")
    if embedding.zero_norm_rows:
        raise ZeroNormRow(
            f"rows {list(embedding.zero_norm_rows)} project at the origin; "
            "no orientation defined for them"
        )
    return embedding.row_correlations.copy()


# ---------------------------------------------------------------------------
# serialization

def embedding_to_dict(embedding: CorrespondenceEmbedding) -> dict:
    return {
        "schema": EMBEDDING_SCHEMA,
        "eigenvalues": embedding.eigenvalues.tolist(),
        "inertia_total": embedding.inertia_total,
        "percent_inertia": embedding.percent_inertia.tolist(),
        "row_labels": list(embedding.row_labels),
        "col_labels": list(embedding.col_labels),
        "row_masses": embedding.row_masses.tolist(),
        "col_masses": embedding.col_masses.tolist(),
        "row_projections": embedding.row_coords.tolist(),
        "col_projections": embedding.col_coords.tolist(),
        "row_correlations": embedding.row_correlations.tolist(),
        "row_squared_cosines": embedding.row_squared_cosines.tolist(),
        "col_correlations": embedding.col_correlations.tolist(),
        "zero_norm_rows": list(embedding.zero_norm_rows),
        "zero_norm_cols": list(embedding.zero_norm_cols),
    }


def embedding_from_dict(doc: dict) -> CorrespondenceEmbedding:
    if doc.get("schema") != EMBEDDING_SCHEMA:
        raise ValueError(f"not an embedding document (schema={doc.get('schema')!r})")
    n = len(doc["row_labels"])
    m = len(doc["col_labels"])
    n_factors = len(doc["eigenvalues"])

    def arr(key, shape):
        a = np.asarray(doc[key], dtype=float).reshape(shape)
        return a

    return CorrespondenceEmbedding(
        eigenvalues=arr("eigenvalues", (n_factors,)),
        inertia_total=float(doc["inertia_total"]),
        percent_inertia=arr("percent_inertia", (n_factors,)),
        row_coords=arr("row_projections", (n, n_factors)),
        col_coords=arr("col_projections", (m, n_factors)),
        row_masses=arr("row_masses", (n,)),
        col_masses=arr("col_masses", (m,)),
        row_correlations=arr("row_correlations", (n, n_factors)),
        row_squared_cosines=arr("row_squared_cosines", (n, n_factors)),
        col_correlations=arr("col_correlations", (m, n_factors)),
        zero_norm_rows=tuple(doc["zero_norm_rows"]),
        zero_norm_cols=tuple(doc["zero_norm_cols"]),
        row_labels=tuple(doc["row_labels"]),
        col_labels=tuple(doc["col_labels"]),
    )


def save_embedding(embedding: CorrespondenceEmbedding, path: str | Path) -> None:
    write_json_atomic(path, embedding_to_dict(embedding))


def load_embedding(path: str | Path) -> CorrespondenceEmbedding:
    return embedding_from_dict(read_json(path))
