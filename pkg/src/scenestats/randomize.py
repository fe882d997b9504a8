"""Permutation benchmark of style attributes against seeded random orders.

Each trial draws a uniform random permutation of the unit order and
recomputes the nine attributes on the permuted sequence.  The embedding is
never recomputed: a permutation moves the points, not the table content, so
the factor coordinates and orientations of the units are unchanged.  Trial
sub-generators are derived counter-style from (seed, run, trial), so results
are bit-identical no matter how trials are scheduled across workers.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .ca import CorrespondenceEmbedding
from .errors import TooFewUnits
from .io_utils import read_json, write_json_atomic
from .style import ATTRIBUTE_NAMES, StyleProfile, style_profile

REPORT_SCHEMA = "scenestats/report/v1"
SIGNIFICANCE_SCHEMA = "scenestats/significance/v1"

DEFAULT_TRIALS = 999
DEFAULT_THRESHOLD = 80.0


@dataclass(frozen=True)
class AttributeComparison:
    """One attribute's real value against the trial distribution.

    Ties (real == trial) count toward both tails, so frac_le + frac_ge >= 1.
    ``direction`` is "<=" or ">=" when the corresponding fraction clears the
    report threshold, else None.
    """

    attribute: int
    name: str
    real: float
    frac_le: float
    frac_ge: float
    direction: str | None


@dataclass(frozen=True)
class RandomizationReport:
    n_units: int
    n_trials: int
    seed: int
    run: int
    threshold: float
    real: StyleProfile
    comparisons: tuple[AttributeComparison, ...]


def _direction(frac_le: float, frac_ge: float, threshold: float) -> str | None:
    if 100.0 * frac_le < threshold and 100.0 * frac_ge < threshold:
        return None
    return "<=" if frac_le >= frac_ge else ">="


def randomize_test(
    embedding: CorrespondenceEmbedding,
    lengths: Sequence[int],
    n_trials: int = DEFAULT_TRIALS,
    seed: int = 0,
    threshold: float = DEFAULT_THRESHOLD,
    run: int = 0,
    n_jobs: int = 1,
) -> RandomizationReport:
    """Compare the real order against ``n_trials`` seeded random permutations.

    ``run`` selects an independent batch of trials for repeated-run studies
    with the same master seed.
    """
    n = embedding.row_coords.shape[0]
    if n < 3:
        raise TooFewUnits(f"randomization needs at least 3 units, got {n}")
    if n_trials < 1:
        raise ValueError(f"n_trials must be >= 1, got {n_trials}")

    real = style_profile(embedding, lengths)
    real_vec = real.as_array()

    trials = np.empty((n_trials, len(ATTRIBUTE_NAMES)))

    def compute(t: int) -> None:
        rng = np.random.default_rng([seed, run, t])
        perm = rng.permutation(n)
        trials[t] = style_profile(embedding, lengths, order=perm).as_array()

    if n_jobs <= 1:
        for t in range(n_trials):
            compute(t)
    else:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            list(pool.map(compute, range(n_trials)))

    le = (real_vec <= trials).sum(axis=0)
    ge = (real_vec >= trials).sum(axis=0)
    comparisons = []
    for idx, name in enumerate(ATTRIBUTE_NAMES):
        frac_le = le[idx] / n_trials
        frac_ge = ge[idx] / n_trials
        comparisons.append(
            AttributeComparison(
                attribute=idx + 1,
                name=name,
                real=float(real_vec[idx]),
                frac_le=float(frac_le),
                frac_ge=float(frac_ge),
                direction=_direction(frac_le, frac_ge, threshold),
            )
        )
    return RandomizationReport(
        n_units=n,
        n_trials=n_trials,
        seed=seed,
        run=run,
        threshold=threshold,
        real=real,
        comparisons=tuple(comparisons),
    )


def repeat_randomize_test(
    embedding: CorrespondenceEmbedding,
    lengths: Sequence[int],
    repeats: int,
    n_trials: int = DEFAULT_TRIALS,
    seed: int = 0,
    threshold: float = DEFAULT_THRESHOLD,
    n_jobs: int = 1,
) -> tuple[RandomizationReport, ...]:
    """Run several independent trial batches (run = 0..repeats-1)."""
    if repeats < 1:
        raise ValueError(f"repeats must be >= 1, got {repeats}")
    return tuple(
        randomize_test(embedding, lengths, n_trials, seed, threshold, run=r, n_jobs=n_jobs)
        for r in range(repeats)
    )


def repeat_summary(reports: Sequence[RandomizationReport]) -> dict[int, dict]:
    """Per attribute, the share of runs in which each direction cleared the threshold."""
    out = {}
    for idx, name in enumerate(ATTRIBUTE_NAMES):
        le_hits = sum(
            1 for rep in reports if 100.0 * rep.comparisons[idx].frac_le >= rep.threshold
        )
        ge_hits = sum(
            1 for rep in reports if 100.0 * rep.comparisons[idx].frac_ge >= rep.threshold
        )
        out[idx + 1] = {
            "name": name,
            "runs": len(reports),
            "le_significant_runs": le_hits,
            "ge_significant_runs": ge_hits,
        }
    return out


# ---------------------------------------------------------------------------
# cross-script significance table

@dataclass(frozen=True)
class SignificanceRow:
    script: str
    attribute: int
    direction: str
    percent: int


@dataclass(frozen=True)
class SignificanceTable:
    threshold: float
    rows: tuple[SignificanceRow, ...]


def summarize_table(
    named_reports: Sequence[tuple[str, RandomizationReport]],
    threshold: float = DEFAULT_THRESHOLD,
) -> SignificanceTable:
    """Collect (script, attribute, direction, %) rows that clear the threshold.

    The dominant tail decides the direction; percentages are rounded to
    integers.  Degenerate attributes significant in both tails report the
    dominant one only ("<=" when tied).
    """
    rows = []
    for script, report in named_reports:
        for comp in report.comparisons:
            frac = max(comp.frac_le, comp.frac_ge)
            if 100.0 * frac >= threshold:
                direction = "<=" if comp.frac_le >= comp.frac_ge else ">="
                rows.append(
                    SignificanceRow(
                        script=script,
                        attribute=comp.attribute,
                        direction=direction,
                        percent=int(round(100.0 * frac)),
                    )
                )
    return SignificanceTable(threshold=threshold, rows=tuple(rows))


def significance_to_dict(table: SignificanceTable) -> dict:
    return {
        "schema": SIGNIFICANCE_SCHEMA,
        "threshold": table.threshold,
        "rows": [
            {
                "script": r.script,
                "attribute": r.attribute,
                "direction": r.direction,
                "percent": r.percent,
            }
            for r in table.rows
        ],
    }


def significance_text(table: SignificanceTable) -> str:
    """Aligned plain-text rendering of the significance table."""
    header = ("script", "attribute", "direction", "% of cases")
    cells = [header] + [
        (r.script, str(r.attribute), r.direction, f"{r.percent}%") for r in table.rows
    ]
    widths = [max(len(row[c]) for row in cells) for c in range(4)]
    lines = ["  ".join(row[c].ljust(widths[c]) for c in range(4)).rstrip() for row in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def significance_tsv(table: SignificanceTable) -> str:
    lines = ["script\tattribute\tdirection\tpercent"]
    for r in table.rows:
        lines.append(f"{r.script}\t{r.attribute}\t{r.direction}\t{r.percent}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# serialization

def report_to_dict(report: RandomizationReport) -> dict:
    return {
        "schema": REPORT_SCHEMA,
        "n_units": report.n_units,
        "n_trials": report.n_trials,
        "seed": report.seed,
        "run": report.run,
        "threshold": report.threshold,
        "real_profile": report.real.as_dict(),
        "comparisons": [
            {
                "attribute": c.attribute,
                "name": c.name,
                "real": c.real,
                "frac_le": c.frac_le,
                "frac_ge": c.frac_ge,
                "direction": c.direction,
            }
            for c in report.comparisons
        ],
    }


def report_from_dict(doc: dict) -> RandomizationReport:
    if doc.get("schema") != REPORT_SCHEMA:
        raise ValueError(f"not a randomization report (schema={doc.get('schema')!r})")
    comparisons = tuple(
        AttributeComparison(
            attribute=int(c["attribute"]),
            name=c["name"],
            real=float(c["real"]),
            frac_le=float(c["frac_le"]),
            frac_ge=float(c["frac_ge"]),
            direction=c["direction"],
        )
        for c in doc["comparisons"]
    )
    return RandomizationReport(
        n_units=int(doc["n_units"]),
        n_trials=int(doc["n_trials"]),
        seed=int(doc["seed"]),
        run=int(doc["run"]),
        threshold=float(doc["threshold"]),
        real=StyleProfile.from_dict(doc["real_profile"]),
        comparisons=comparisons,
    )


def save_report(report: RandomizationReport, path: str | Path) -> None:
    write_json_atomic(path, report_to_dict(report))


def load_report(path: str | Path) -> RandomizationReport:
    return report_from_dict(read_json(path))
