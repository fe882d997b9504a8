"""Acceptance suite: one test per release criterion, printing PASS/FAIL lines.

Run with `pytest tests/test_acceptance.py -v -s` to see per-criterion lines.

Criteria that depend on externally sourced script texts (the 1942 feature
film used as the worked example) read them from environment variables and
are skipped when absent:

  SCENESTATS_CASABLANCA       path to the IMSDb-sourced script text
  SCENESTATS_SCENE43_OFFSETS  sidecar of 10 beat offsets for scene 43
"""

from __future__ import annotations

import os
import time
from contextlib import contextmanager

import numpy as np
import pytest

from scenestats.bundle import analyze_text
from scenestats.ca import chi2_distances, embed, make_profiles, total_inertia
from scenestats.cli import main
from scenestats.cluster import cluster
from scenestats.contingency import FREQUENCY, build_table, prune, zipf_summary
from scenestats.ingest import BUILTIN_PROFILES, load_beats, split_scenes, tokenize
from scenestats.randomize import randomize_test
from scenestats.style import ATTRIBUTE_NAMES, movement_attrs, style_profile, tempo_attrs

from conftest import fake_embedding, make_table, synthetic_script
from reference import exhaustive_cluster

BEAT_LENGTHS = (51, 23, 99, 39, 30, 17, 50, 44, 38, 30, 46)


@contextmanager
def criterion(num: int, desc: str):
    try:
        yield
    except pytest.skip.Exception:
        print(f"ACCEPTANCE {num} {desc}: SKIPPED (fixture text not provided)")
        raise
    except BaseException:
        print(f"ACCEPTANCE {num} {desc}: FAIL")
        raise
    else:
        print(f"ACCEPTANCE {num} {desc}: PASS")


def _random_table_corpus(count=120, seed=2024):
    """Random count tables up to 20x40 with entries 0..5, pruned."""
    rng = np.random.default_rng(seed)
    corpus = []
    while len(corpus) < count:
        n = int(rng.integers(2, 21))
        m = int(rng.integers(2, 41))
        values = rng.integers(0, 6, size=(n, m))
        keep_r = values.sum(axis=1) > 0
        keep_c = values.sum(axis=0) > 0
        if keep_r.sum() < 2 or keep_c.sum() < 2:
            continue
        table, _ = prune(make_table(values, FREQUENCY))
        corpus.append(table)
    return corpus


_CORPUS = None


def corpus():
    global _CORPUS
    if _CORPUS is None:
        _CORPUS = _random_table_corpus()
    return _CORPUS


def test_criterion_1_distance_preservation():
    with criterion(1, "chi-squared distance preserved in factor space"):
        start = time.perf_counter()
        worst = 0.0
        for table in corpus():
            cloud = make_profiles(table)
            emb = embed(cloud)
            direct = chi2_distances(cloud)
            coords = emb.row_coords
            diff = coords[:, None, :] - coords[None, :, :]
            factor = (diff * diff).sum(axis=-1)
            dev = np.abs(direct - factor) / np.maximum(direct, 1e-12)
            worst = max(worst, float(dev.max()))
        elapsed = time.perf_counter() - start
        assert worst < 1e-8, f"max relative deviation {worst}"
        assert elapsed < 10.0, f"corpus took {elapsed:.1f}s"


def test_criterion_2_inertia_conservation():
    with criterion(2, "eigenvalue sum equals total inertia; uniform tables inert"):
        for table in corpus():
            cloud = make_profiles(table)
            emb = embed(cloud)
            inertia = total_inertia(cloud)
            assert abs(emb.eigenvalues.sum() - inertia) <= 1e-10 * inertia
        for n, m, c in ((2, 2, 1), (3, 4, 2), (7, 5, 3), (10, 10, 5)):
            uniform = make_profiles(make_table(np.full((n, m), c), FREQUENCY))
            assert total_inertia(uniform) < 1e-12
            assert embed(uniform).n_factors == 0


def test_criterion_3_clustering_oracle_equivalence():
    with criterion(3, "chain clustering identical to exhaustive rescan, no inversions"):
        rng = np.random.default_rng(99)
        checked = 0
        while checked < 520:
            n = int(rng.integers(2, 9))
            d = int(rng.integers(1, 6))
            pts = rng.normal(size=(n, d))
            dend = cluster(pts)
            got = [
                (m.left_start, m.left_end, m.right_start, m.right_end, m.height)
                for m in dend.merges
            ]
            expected = exhaustive_cluster(pts)
            assert got == expected, f"instance {checked}: merge sequences differ"
            heights = dend.heights()
            assert all(a <= b for a, b in zip(heights, heights[1:]))
            checked += 1
        # tie-heavy corpus: duplicates everywhere, heights must stay monotone
        for _ in range(200):
            n = int(rng.integers(2, 30))
            pts = rng.integers(-2, 3, size=(n, int(rng.integers(1, 4)))).astype(float)
            heights = cluster(pts).heights()
            assert all(a <= b for a, b in zip(heights, heights[1:]))


def test_criterion_4_beat_lengths_hand_arithmetic():
    with criterion(4, "mid-act beat lengths reproduce hand-computed tempo"):
        a5, a6 = tempo_attrs(BEAT_LENGTHS)
        assert a5 == 25.5
        assert a6 == -0.5


def test_criterion_4_scene43_text_fixture():
    with criterion(4, "scene 43 beats: table shape and first-plane inertia"):
        script_path = os.environ.get("SCENESTATS_CASABLANCA")
        offsets_path = os.environ.get("SCENESTATS_SCENE43_OFFSETS")
        if not script_path or not offsets_path:
            pytest.skip("set SCENESTATS_CASABLANCA and SCENESTATS_SCENE43_OFFSETS")
        text = open(script_path, encoding="utf-8").read()
        units = split_scenes(text, BUILTIN_PROFILES["imsdb"])
        scene43 = next(u for u in units if u.index == 43)
        beats = load_beats(scene43, offsets_path)
        assert len(beats) == 11
        table, _ = prune(build_table(beats, "presence"))
        assert table.n_rows == 11
        assert 160 <= table.n_cols <= 260, f"vocabulary {table.n_cols}, expected ~210"
        emb = embed(make_profiles(table))
        first_plane = float(emb.percent_inertia[:2].sum())
        assert abs(first_plane - 24.8) <= 3.0, f"first plane explains {first_plane:.1f}%"
        # qualitative reading (reported, not asserted: tokenization-sensitive)
        dend = cluster(emb.row_correlations)
        early = {(m.left_start, m.right_end) for m in dend.merges[:4]}
        print(f"  beats 2-4 co-cluster early: {(2, 4) in early or (2, 3) in early}")
        beat8_merge = next(
            i for i, m in enumerate(dend.merges) if m.left_start <= 8 <= m.right_end
        )
        print(f"  beat 8 first joins at merge {beat8_merge + 1} of {len(dend.merges)}")


def test_criterion_5_structural_replication():
    with criterion(5, "feature-film structural replication (77 scenes, vocabulary)"):
        script_path = os.environ.get("SCENESTATS_CASABLANCA")
        if not script_path:
            pytest.skip("set SCENESTATS_CASABLANCA to the IMSDb script text")
        text = open(script_path, encoding="utf-8").read()
        start = time.perf_counter()
        units, bundle = analyze_text(
            text, BUILTIN_PROFILES["imsdb"], script_name="casablanca"
        )
        elapsed = time.perf_counter() - start
        assert bundle.n_units == 77, f"parsed {bundle.n_units} scenes"
        assert abs(bundle.vocab_size - 6710) <= 0.02 * 6710, f"vocabulary {bundle.vocab_size}"
        freq = build_table(units, FREQUENCY)
        top3 = dict(zipf_summary(freq, top_k=3).ranked)
        assert set(top3) == {"the", "rick", "you"}, f"top words {sorted(top3)}"
        for word, expected in (("the", 965), ("rick", 689), ("you", 651)):
            assert abs(top3[word] - expected) <= 0.02 * expected, (word, top3[word])
        assert elapsed < 5.0, f"analyze+cluster took {elapsed:.1f}s"
        # qualitative reading: the closing scenes pair off (reported, not asserted)
        pairs = {(m.left_start, m.right_end) for m in bundle.dendrogram.merges}
        print(f"  closing scenes pair off: 74+75 {(74, 75) in pairs}, "
              f"76+77 {(76, 77) in pairs}")


def test_criterion_5_timing_surrogate():
    # same pipeline and scale as the real text, so the <5s budget is
    # enforced even when the film script is not on disk
    with criterion(5, "77-scene pipeline finishes within budget (synthetic stand-in)"):
        text = synthetic_script(n_scenes=77, seed=7)
        start = time.perf_counter()
        _, bundle = analyze_text(
            text, BUILTIN_PROFILES["imsdb"], script_name="surrogate"
        )
        elapsed = time.perf_counter() - start
        assert bundle.n_units == 77
        assert len(bundle.dendrogram.merges) == bundle.table.n_rows - 1
        assert elapsed < 5.0, f"analyze+cluster took {elapsed:.1f}s"


def test_criterion_6_monte_carlo_determinism(tmp_path):
    with criterion(6, "fixed-seed randomization bit-identical across worker counts"):
        script = tmp_path / "long.txt"
        script.write_text(synthetic_script(n_scenes=77, seed=13), encoding="utf-8")
        bundle_path = tmp_path / "long.bundle.json"
        assert main(["analyze", str(script), "--out", str(bundle_path)]) == 0

        reports = {}
        start = time.perf_counter()
        for jobs in (1, 4, 8):
            out = tmp_path / f"report-{jobs}.json"
            rc = main([
                "test", str(bundle_path), "--trials", "999", "--seed", "7",
                "--jobs", str(jobs), "--out", str(out),
            ])
            assert rc == 0
            reports[jobs] = out.read_bytes()
        elapsed = time.perf_counter() - start
        assert reports[1] == reports[4] == reports[8]
        assert elapsed / 3 < 30.0, f"999 trials took {elapsed / 3:.1f}s"

        # the identity permutation reproduces the real profile exactly
        rng = np.random.default_rng(0)
        emb = fake_embedding(rng.normal(size=(77, 6)))
        lengths = rng.integers(5, 400, size=77).tolist()
        assert style_profile(emb, lengths, order=np.arange(77)) == style_profile(emb, lengths)


def test_criterion_7_decreasing_lengths_extremity():
    with criterion(7, "strictly decreasing scene lengths flag extreme signed tempo"):
        body_words = [210 - 10 * i for i in range(20)]  # 210 down to 20
        text = synthetic_script(n_scenes=20, seed=21, lengths=body_words)
        _, bundle = analyze_text(text, BUILTIN_PROFILES["imsdb"], script_name="tension")
        lengths = list(bundle.lengths)
        assert all(a > b for a, b in zip(lengths, lengths[1:])), "lengths not decreasing"
        report = randomize_test(bundle.embedding, lengths, n_trials=999, seed=5)
        signed_tempo = report.comparisons[5]
        assert signed_tempo.name == "tempo_signed_mean"
        assert signed_tempo.frac_le >= 0.99, f"frac_le {signed_tempo.frac_le}"


def test_criterion_8_style_metric_symmetries():
    with criterion(8, "style metric symmetry suite exact"):
        rng = np.random.default_rng(31)
        for _ in range(25):
            n = int(rng.integers(3, 15))
            coords = rng.normal(size=(n, int(rng.integers(1, 6))))
            emb = fake_embedding(coords)
            lengths = rng.integers(1, 500, size=n).tolist()
            fwd = style_profile(emb, lengths)
            rev = style_profile(emb, lengths, order=np.arange(n - 1, -1, -1))
            assert rev.tempo_signed_mean == -fwd.tempo_signed_mean
            assert rev.rhythm_signed_mean == -fwd.rhythm_signed_mean
            for name in ATTRIBUTE_NAMES:
                if name not in ("tempo_signed_mean", "rhythm_signed_mean"):
                    assert getattr(rev, name) == getattr(fwd, name), name

        # translation: dyadic grid and shift keep every addition exact
        for _ in range(25):
            n = int(rng.integers(2, 12))
            coords = rng.integers(-64, 65, size=(n, 3)).astype(float) / 16.0
            emb = fake_embedding(coords)
            shifted = fake_embedding(coords + 5.75)
            assert movement_attrs(emb) == movement_attrs(shifted)

        # constant lengths zero out attributes 5..9 exactly
        for n in (2, 3, 8, 50):
            emb = fake_embedding(rng.normal(size=(n, 2)))
            p = style_profile(emb, [37] * n)
            assert (p.tempo_abs_mean, p.tempo_signed_mean) == (0.0, 0.0)
            assert (p.rhythm_mean, p.rhythm_var, p.rhythm_signed_mean) == (0.0, 0.0, 0.0)
