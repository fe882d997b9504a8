"""Command-line interface: parse, analyze, cluster, test, render, batch.

Exit codes: 0 success, 2 input or configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import __version__
from .bundle import (
    POINTS_CORRELATIONS,
    POINTS_PROJECTIONS,
    analyze_text,
    analyze_units,
    bundle_from_dict,
    load_bundle,
    save_bundle,
)
from .ca import embedding_from_dict, save_embedding
from .cluster import cut, dendrogram_to_dict, to_newick
from .contingency import PRESENCE, FREQUENCY, save_table_delimited, save_table
from .errors import NumericalFailure, ScriptAnalysisError
from .ingest import (
    load_units,
    resolve_profile,
    save_units,
    split_beats_on_marker,
    split_scenes,
    tokenize,
)
from .io_utils import read_json, sha256_text, write_json_atomic, write_text_atomic
from .randomize import (
    randomize_test,
    repeat_randomize_test,
    repeat_summary,
    report_to_dict,
    save_report,
    significance_text,
    significance_to_dict,
    significance_tsv,
    summarize_table,
)
from .render import dendrogram_to_dot, render_dendrogram, render_factor_plane, save_dot

log = logging.getLogger("scenestats")

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERICAL = 3


def _read_text(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _parse_units(args) -> list:
    """Parse + tokenize a script per the CLI flags (shared by parse/analyze/batch)."""
    raw = _read_text(args.script)
    profile = resolve_profile(args.profile)
    units = split_scenes(raw, profile)
    if getattr(args, "scene", None) is not None:
        target = next((u for u in units if u.index == args.scene), None)
        if target is None:
            raise ScriptAnalysisError(f"scene {args.scene} not found (got {len(units)} scenes)")
        if getattr(args, "beat_offsets", None):
            return load_beats_cli(target, args.beat_offsets)
        if profile.beat_marker:
            return split_beats_on_marker(target, profile.beat_marker)
        raise ScriptAnalysisError("--scene needs --beat-offsets or a profile beat_marker")
    include = not args.exclude_headings
    return [tokenize(u, include_heading=include) for u in units]


def load_beats_cli(scene, offsets_path):
    from .ingest import load_beats

    return load_beats(scene, offsets_path)


def cmd_parse(args) -> int:
    units = _parse_units(args)
    source = {
        "path": args.script,
        "sha256": sha256_text(_read_text(args.script)),
        "profile": args.profile,
    }
    if getattr(args, "scene", None) is not None:
        source["scene"] = args.scene
    save_units(units, args.out, source=source)
    print(f"{args.out}: {len(units)} unit(s)")
    return EXIT_OK


def _analyze_one(input_path, args, script_name=None):
    """Run the analysis pipeline on a script file or a units JSON document."""
    name = script_name or Path(input_path).stem
    mode = args.mode
    points = args.points
    if str(input_path).endswith(".json"):
        units = load_units(input_path)
        config = {"source": "units", "include_headings": None, "profile": None}
        bundle = analyze_units(
            units, script_name=name, mode=mode, points=points, top_k=args.top_k, config=config
        )
    else:
        raw = _read_text(input_path)
        profile = resolve_profile(args.profile)
        include = not args.exclude_headings
        _, bundle = analyze_text(
            raw,
            profile,
            script_name=name,
            include_headings=include,
            mode=mode,
            points=points,
            top_k=args.top_k,
            config={"source": "script"},
        )
    return bundle


def cmd_analyze(args) -> int:
    bundle = _analyze_one(args.input, args)
    save_bundle(bundle, args.out)
    if args.embedding_out:
        save_embedding(bundle.embedding, args.embedding_out)
    if args.table_out:
        save_table(bundle.table, args.table_out)
    if args.table_tsv:
        save_table_delimited(bundle.table, args.table_tsv)
    n_factors = len(bundle.embedding_summary["eigenvalues"])
    print(
        f"{bundle.script}: {bundle.n_units} unit(s), vocabulary {bundle.vocab_size}, "
        f"{n_factors} factor(s) -> {args.out}"
    )
    return EXIT_OK


def _load_dendrogram_input(path):
    doc = read_json(path)
    schema = doc.get("schema", "")
    if schema.startswith("scenestats/bundle/"):
        bundle = bundle_from_dict(doc)
        return bundle.dendrogram, [str(lbl) for lbl in bundle.table.row_labels], bundle
    if schema.startswith("scenestats/embedding/"):
        from .cluster import cluster_by_orientation

        emb = embedding_from_dict(doc)
        return cluster_by_orientation(emb), [str(lbl) for lbl in emb.row_labels], None
    raise ScriptAnalysisError(f"expected a bundle or embedding document, got {schema!r}")


def cmd_cluster(args) -> int:
    dend, labels, _ = _load_dendrogram_input(args.input)
    prefix = Path(args.out_prefix)
    write_json_atomic(str(prefix) + ".dendrogram.json", dendrogram_to_dict(dend))
    write_text_atomic(str(prefix) + ".nwk", to_newick(dend, labels) + "\n")
    outputs = [str(prefix) + ".dendrogram.json", str(prefix) + ".nwk"]
    if args.k is not None:
        segments = cut(dend, args.k)
        seg_doc = {
            "schema": "scenestats/segments/v1",
            "k": args.k,
            "segments": [[s, e] for s, e in segments],
        }
        write_json_atomic(str(prefix) + ".segments.json", seg_doc)
        outputs.append(str(prefix) + ".segments.json")
        pretty = ", ".join(f"{s}-{e}" for s, e in segments)
        print(f"k={args.k}: {pretty}")
    print("wrote " + ", ".join(outputs))
    return EXIT_OK


def cmd_test(args) -> int:
    bundle = load_bundle(args.bundle)
    if args.repeats > 1:
        reports = repeat_randomize_test(
            bundle.embedding,
            bundle.lengths,
            repeats=args.repeats,
            n_trials=args.trials,
            seed=args.seed,
            threshold=args.threshold,
            n_jobs=args.jobs,
        )
        doc = {
            "schema": "scenestats/report-runs/v1",
            "runs": [report_to_dict(r) for r in reports],
            "summary": {str(k): v for k, v in repeat_summary(reports).items()},
        }
        write_json_atomic(args.out, doc)
        report = reports[0]
    else:
        report = randomize_test(
            bundle.embedding,
            bundle.lengths,
            n_trials=args.trials,
            seed=args.seed,
            threshold=args.threshold,
            n_jobs=args.jobs,
        )
        save_report(report, args.out)
    if args.bundle_out:
        save_bundle(bundle.with_report(report), args.bundle_out)
    flagged = [c for c in report.comparisons if c.direction]
    for c in flagged:
        print(f"attribute {c.attribute} ({c.name}): {c.direction} in "
              f"{100.0 * max(c.frac_le, c.frac_ge):.0f}% of trials")
    if not flagged:
        print(f"no attribute cleared the {args.threshold:.0f}% threshold")
    return EXIT_OK


def cmd_render(args) -> int:
    bundle = load_bundle(args.bundle)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = bundle.script
    labels = [str(lbl) for lbl in bundle.table.row_labels]
    written = []
    if args.plot == "factors":
        a, b = (int(x) for x in args.axes.split(","))
        svg = out_dir / f"{stem}.factors-{a}x{b}.svg"
        tsv = out_dir / f"{stem}.factors-{a}x{b}.tsv"
        render_factor_plane(
            bundle.embedding, svg, axes=(a, b), out_tsv=tsv,
            title=f"{stem}: factor plane {a}x{b}",
        )
        written += [svg, tsv]
    else:
        svg = out_dir / f"{stem}.dendrogram.svg"
        tsv = out_dir / f"{stem}.dendrogram.tsv"
        dot = out_dir / f"{stem}.dendrogram.dot"
        render_dendrogram(
            bundle.dendrogram, svg, labels=labels, out_tsv=tsv,
            title=f"{stem}: sequence-constrained complete-link hierarchy",
        )
        save_dot(bundle.dendrogram, dot, labels=labels)
        written += [svg, tsv, dot]
    print("wrote " + ", ".join(str(p) for p in written))
    return EXIT_OK


def cmd_batch(args) -> int:
    scripts = sorted(
        p for p in Path(args.directory).iterdir()
        if p.is_file() and p.suffix.lower() in (".txt", ".text", ""))
    if not scripts:
        raise ScriptAnalysisError(f"no script files found in {args.directory}")
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    def work(path: Path):
        wrapped = argparse.Namespace(**vars(args), script=None)
        bundle = _analyze_one(str(path), wrapped, script_name=path.stem)
        report = randomize_test(
            bundle.embedding,
            bundle.lengths,
            n_trials=args.trials,
            seed=args.seed,
            threshold=args.threshold,
        )
        bundle = bundle.with_report(report)
        save_bundle(bundle, out_dir / f"{path.stem}.bundle.json")
        return path.stem, bundle, report

    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(work, scripts))
    else:
        results = [work(p) for p in scripts]

    table = summarize_table([(name, report) for name, _, report in results],
                            threshold=args.threshold)
    write_json_atomic(out_dir / "significance.json", significance_to_dict(table))
    write_text_atomic(out_dir / "significance.txt", significance_text(table))
    write_text_atomic(out_dir / "significance.tsv", significance_tsv(table))
    for name, bundle, _ in results:
        print(f"{name}: {bundle.n_units} unit(s), vocabulary {bundle.vocab_size}")
    print(significance_text(table), end="")
    print(f"wrote {len(results)} bundle(s) and significance table to {out_dir}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scenestats",
        description="Quantify style and structure of sequential narratives (film/TV scripts).",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="split a script into units and tokenize them")
    p.add_argument("script")
    p.add_argument("--profile", default="imsdb",
                   help="built-in profile name, config-dir name, or profile JSON path")
    p.add_argument("--scene", type=int, default=None,
                   help="emit the beats of this scene instead of whole scenes")
    p.add_argument("--beat-offsets", default=None,
                   help="sidecar file of beat offsets (one integer per line)")
    p.add_argument("--exclude-headings", action="store_true",
                   help="do not count slugline words as unit tokens")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("analyze", help="build table, embedding, hierarchy and style profile")
    p.add_argument("input", help="script text file, or a units JSON document")
    p.add_argument("--profile", default="imsdb")
    p.add_argument("--mode", choices=(PRESENCE, FREQUENCY), default=PRESENCE)
    p.add_argument("--points", choices=(POINTS_CORRELATIONS, POINTS_PROJECTIONS),
                   default=POINTS_CORRELATIONS, help="vectors fed to the clustering")
    p.add_argument("--top-k", type=int, default=20, help="words kept in the frequency ranking")
    p.add_argument("--exclude-headings", action="store_true")
    p.add_argument("--out", required=True, help="bundle JSON path")
    p.add_argument("--embedding-out", default=None,
                   help="also write the full embedding export (row and column side)")
    p.add_argument("--table-out", default=None, help="also write the pruned table JSON")
    p.add_argument("--table-tsv", default=None, help="also write the dense delimited table")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("cluster", help="export dendrogram (JSON/Newick) and optional cut")
    p.add_argument("input", help="bundle JSON or embedding JSON")
    p.add_argument("--k", type=int, default=None, help="cut into k contiguous segments")
    p.add_argument("--out-prefix", required=True)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("test", help="randomization significance test of a bundle")
    p.add_argument("bundle")
    p.add_argument("--trials", type=int, default=999)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threshold", type=float, default=80.0, help="significance threshold in %%")
    p.add_argument("--repeats", type=int, default=1, help="independent runs of the whole test")
    p.add_argument("--jobs", type=int, default=1, help="worker threads for trials")
    p.add_argument("--out", required=True, help="report JSON path")
    p.add_argument("--bundle-out", default=None, help="write the bundle with the report attached")
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("render", help="render figures from a bundle")
    p.add_argument("bundle")
    p.add_argument("--plot", choices=("dendrogram", "factors"), required=True)
    p.add_argument("--axes", default="1,2", help="factor pair for the scatter, e.g. 1,2")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("batch", help="analyze and test every script in a directory")
    p.add_argument("directory")
    p.add_argument("--profile", default="imsdb")
    p.add_argument("--mode", choices=(PRESENCE, FREQUENCY), default=PRESENCE)
    p.add_argument("--points", choices=(POINTS_CORRELATIONS, POINTS_PROJECTIONS),
                   default=POINTS_CORRELATIONS)
    p.add_argument("--top-k", type=int, default=20)
    p.add_argument("--exclude-headings", action="store_true")
    p.add_argument("--trials", type=int, default=999)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threshold", type=float, default=80.0)
    p.add_argument("--jobs", type=int, default=min(4, os.cpu_count() or 1))
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_batch)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ScriptAnalysisError, OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
