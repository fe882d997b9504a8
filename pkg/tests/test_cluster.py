import numpy as np
import pytest

from scenestats.ca import embed, make_profiles, orientation_matrix
from scenestats.cluster import (
    Dendrogram,
    Merge,
    cluster,
    cluster_by_orientation,
    cut,
    dendrogram_from_dict,
    dendrogram_to_dict,
    load_dendrogram,
    save_dendrogram,
    to_newick,
)
from scenestats.errors import DimensionMismatch, InvalidK, TooFewUnits, ZeroNormRow
from scenestats.contingency import FREQUENCY

from conftest import make_table, random_pruned_table
from reference import exhaustive_cluster


def as_tuples(dend):
    return [
        (m.left_start, m.left_end, m.right_start, m.right_end, m.height)
        for m in dend.merges
    ]


def check_structure(dend):
    heights = dend.heights()
    assert all(a <= b for a, b in zip(heights, heights[1:])), "inversion"
    for m in dend.merges:
        assert m.right_start == m.left_end + 1, "non-adjacent merge"
    assert dend.merges[-1].left_start == 1
    assert dend.merges[-1].right_end == dend.leaf_count


# -- forced cases --------------------------------------------------------------

def test_three_collinear_points():
    dend = cluster([0.0, 1.0, 10.0])
    assert as_tuples(dend) == [(1, 1, 2, 2, 1.0), (1, 2, 3, 3, 10.0)]


def test_two_points_single_merge():
    dend = cluster([[0.0, 0.0], [3.0, 4.0]])
    assert as_tuples(dend) == [(1, 1, 2, 2, 5.0)]


def test_identical_points_all_heights_zero():
    dend = cluster(np.ones((6, 3)))
    assert dend.heights() == [0.0] * 5
    check_structure(dend)


def test_too_few_units_and_dimension_mismatch():
    with pytest.raises(TooFewUnits):
        cluster([[1.0, 2.0]])
    with pytest.raises(DimensionMismatch):
        cluster([[1.0, 2.0], [1.0]])
    with pytest.raises(DimensionMismatch):
        cluster(np.ones((2, 2, 2)))


# -- oracle equivalence ---------------------------------------------------------

def test_matches_exhaustive_rescanning_oracle():
    rng = np.random.default_rng(0)
    for _ in range(100):
        n = int(rng.integers(2, 9))
        d = int(rng.integers(1, 5))
        pts = rng.normal(size=(n, d))
        dend = cluster(pts)
        expected = exhaustive_cluster(pts)
        got = as_tuples(dend)
        assert len(got) == len(expected)
        for g, e in zip(got, expected):
            assert g[:4] == e[:4]
            assert g[4] == e[4]  # heights are exactly the same pairwise maxima


def test_no_inversions_and_contiguity_under_ties():
    # integer grids force many tied and duplicate distances
    rng = np.random.default_rng(1)
    for _ in range(150):
        n = int(rng.integers(2, 25))
        d = int(rng.integers(1, 4))
        pts = rng.integers(-2, 3, size=(n, d)).astype(float)
        dend = cluster(pts)
        check_structure(dend)


def test_reversal_gives_mirror_with_same_heights():
    rng = np.random.default_rng(2)
    for _ in range(30):
        n = int(rng.integers(2, 13))
        pts = rng.normal(size=(n, 3))
        fwd = cluster(pts)
        rev = cluster(pts[::-1])
        assert sorted(fwd.heights()) == sorted(rev.heights())
        mirrored = sorted(
            (n + 1 - m.right_end, n + 1 - m.right_start, n + 1 - m.left_end,
             n + 1 - m.left_start, m.height)
            for m in fwd.merges
        )
        assert mirrored == sorted(as_tuples(rev))


# -- orientation input ----------------------------------------------------------

def test_cluster_by_orientation_equals_correlation_vectors():
    rng = np.random.default_rng(3)
    while True:  # tiny vocabularies can park a row exactly at the origin
        table = random_pruned_table(rng, max_rows=9, max_cols=12)
        emb = embed(make_profiles(table))
        if not emb.zero_norm_rows:
            break
    assert as_tuples(cluster_by_orientation(emb)) == as_tuples(
        cluster(orientation_matrix(emb))
    )


def test_cluster_by_orientation_rejects_degenerate_embedding():
    emb = embed(make_profiles(make_table(np.full((3, 3), 1), FREQUENCY)))
    with pytest.raises(ZeroNormRow):
        cluster_by_orientation(emb)


# -- cut -------------------------------------------------------------------------

def test_cut_extremes():
    dend = cluster(np.arange(5.0))
    assert cut(dend, 1) == [(1, 5)]
    assert cut(dend, 5) == [(1, 1), (2, 2), (3, 3), (4, 4), (5, 5)]


def test_cut_partitions_and_respects_merge_order():
    pts = np.array([0.0, 0.1, 5.0, 5.1, 20.0])
    dend = cluster(pts)
    segments = cut(dend, 3)
    assert segments == [(1, 2), (3, 4), (5, 5)]
    flat = [i for s, e in segments for i in range(s, e + 1)]
    assert flat == list(range(1, 6))


def test_cut_ties_resolved_toward_later_merges():
    dend = cluster(np.zeros((4, 2)))  # every merge at height 0
    assert cut(dend, 2) == [(1, 3), (4, 4)]  # the chronologically last merge is removed


def test_cut_invalid_k():
    dend = cluster(np.arange(4.0))
    with pytest.raises(InvalidK):
        cut(dend, 0)
    with pytest.raises(InvalidK):
        cut(dend, 5)


# -- exports ----------------------------------------------------------------------

def test_newick_three_points():
    dend = cluster([0.0, 1.0, 10.0])
    assert to_newick(dend) == "((1:1,2:1):9,3:10);"


def test_newick_custom_labels_sanitized():
    dend = cluster([0.0, 1.0])
    text = to_newick(dend, labels=["scene (a)", "scene:b"])
    assert text == "(scene__a_:1,scene_b:1);"


def test_newick_branch_lengths_nonnegative():
    rng = np.random.default_rng(4)
    dend = cluster(rng.normal(size=(10, 2)))
    for part in to_newick(dend).replace("(", "").replace(")", "").split(","):
        if ":" in part:
            assert float(part.rsplit(":", 1)[1].rstrip(";")) >= 0


def test_dendrogram_json_round_trip(tmp_path):
    rng = np.random.default_rng(5)
    dend = cluster(rng.normal(size=(8, 2)))
    path = tmp_path / "dendrogram.json"
    save_dendrogram(dend, path)
    assert load_dendrogram(path) == dend


def test_dendrogram_dict_validation():
    with pytest.raises(ValueError):
        dendrogram_from_dict({"schema": "nope"})
    bad = {
        "schema": "scenestats/dendrogram/v1",
        "leaf_count": 3,
        "merges": [
            {"left": [1, 1], "right": [3, 3], "height": 0.5},  # not adjacent
            {"left": [1, 2], "right": [3, 3], "height": 1.0},
        ],
    }
    with pytest.raises(ValueError):
        dendrogram_from_dict(bad)
    inverted = {
        "schema": "scenestats/dendrogram/v1",
        "leaf_count": 3,
        "merges": [
            {"left": [1, 1], "right": [2, 2], "height": 2.0},
            {"left": [1, 2], "right": [3, 3], "height": 1.0},
        ],
    }
    with pytest.raises(ValueError):
        dendrogram_from_dict(inverted)
