"""Screenplay ingestion: profile-driven scene splitting, tokenization, beats.

A script is carved into scenes by matching heading lines against a
:class:`FormatProfile`.  Everything before the first heading (frontpiece,
credits) is dropped; optional strip patterns drop labeled sections between
scenes.  Tokenization lowercases, keeps letter runs of length >= 2 (one
internal apostrophe allowed, so contractions survive) and lets digits and
all other punctuation act as separators.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

from .errors import InvalidBoundaries, NoScenesFound
from .io_utils import read_json, write_json_atomic

UNITS_SCHEMA = "scenestats/units/v1"
PROFILE_SCHEMA = "scenestats/profile/v1"
CONFIG_DIR_ENV = "SCENESTATS_CONFIG_DIR"

# A word: a maximal run of letters, optionally carrying one internal
# apostrophe ("i'll", "rick's").  Digits never start a token by construction.
WORD_RE = re.compile(r"[^\W\d_]+(?:'[^\W\d_]+)?")

_TIME_WORDS = {
    "DAY", "NIGHT", "MORNING", "AFTERNOON", "EVENING", "DUSK", "DAWN",
    "LATER", "CONTINUOUS", "SAME", "SUNSET", "SUNRISE",
}

_HEADING_META_RE = re.compile(
    r"\[?\s*(INT\s*\.?\s*/\s*EXT|EXT\s*\.?\s*/\s*INT|INT|EXT|I/E|EST)\s*[./]?\s*(.*?)\]?\s*$"
)
_DASH_SPLIT_RE = re.compile(r"\s+-+\s+")


@dataclass(frozen=True)
class FormatProfile:
    """Line-oriented rules for carving one script format into scenes.

    ``scene_heading_patterns`` are regexes matched at the start of each line
    (leading indentation must be allowed for inside the pattern itself).
    ``strip_sections`` patterns open an ignored block that runs until the
    next scene heading.  ``beat_marker`` is a literal delimiter for script
    files whose beats are marked explicitly.
    """

    name: str
    scene_heading_patterns: tuple[str, ...]
    strip_sections: tuple[str, ...] = ()
    beat_marker: str | None = None

    def __post_init__(self):
        if not self.scene_heading_patterns:
            raise ValueError("a format profile needs at least one scene heading pattern")
        for pat in (*self.scene_heading_patterns, *self.strip_sections):
            re.compile(pat)  # fail fast on malformed patterns


BUILTIN_PROFILES = {
    # Master-scene format as published on script archives: sluglines such as
    # "INT. RICK'S CAFE - NIGHT", possibly indented.
    "imsdb": FormatProfile(
        name="imsdb",
        scene_heading_patterns=(r"\s{0,24}(?:INT|EXT|I/E|EST)\s*[./]",),
    ),
    # TV transcript format with bracketed sluglines such as
    # "[INT. CSI - EVIDENCE ROOM -- NIGHT]".
    "twiztv": FormatProfile(
        name="twiztv",
        scene_heading_patterns=(r"\s{0,24}\[\s*(?:INT|EXT|I/E|EST)\s*[./]",),
        strip_sections=(
            r"\s{0,24}\(?(?:OPENING\s+|END\s+)?CREDITS\b",
            r"\s{0,24}PREVIOUSLY\s+ON\b",
        ),
    ),
}


@dataclass(frozen=True)
class SceneUnit:
    """One narrative unit (scene or beat) in sequence order.

    ``heading`` is the raw heading line including its line terminator (empty
    for beats); ``body`` is the raw text that follows, so that
    ``heading + body`` reproduces the unit's exact slice of the source.
    """

    index: int
    heading: str
    body: str
    metadata: dict[str, str] = field(default_factory=dict)
    tokens: tuple[str, ...] = ()

    @property
    def length(self) -> int:
        return len(self.tokens)

    @property
    def raw(self) -> str:
        return self.heading + self.body


def heading_metadata(heading_text: str) -> dict[str, str]:
    """Best-effort parse of a slugline into kind/location/time fields."""
    m = _HEADING_META_RE.match(heading_text.strip())
    if not m:
        return {}
    kind = re.sub(r"[\s.]", "", m.group(1)).upper()
    meta = {"kind": kind}
    rest = m.group(2).strip()
    if rest:
        parts = _DASH_SPLIT_RE.split(rest)
        last = parts[-1].strip()
        first_word = last.split()[0].rstrip(".,").upper() if last else ""
        if len(parts) > 1 and first_word in _TIME_WORDS:
            meta["time"] = last
            meta["location"] = " - ".join(p.strip() for p in parts[:-1])
        else:
            meta["location"] = " - ".join(p.strip() for p in parts)
    return meta


def split_scenes(raw_text: str, profile: FormatProfile) -> list[SceneUnit]:
    """Split script text into ordered scene units (tokens left empty).

    Text before the first heading and inside strip sections is excluded;
    everything else lands byte-exactly in one unit's heading or body.
    Raises NoScenesFound when no heading pattern matches at all.
    """
    if not raw_text:
        raise NoScenesFound("empty input text")
    heading_res = [re.compile(p) for p in profile.scene_heading_patterns]
    strip_res = [re.compile(p) for p in profile.strip_sections]

    units: list[SceneUnit] = []
    heading: str | None = None
    parts: list[str] = []
    skipping = False

    def flush() -> None:
        nonlocal heading, parts
        if heading is not None:
            head_text = heading.rstrip("\r\n")
            units.append(
                SceneUnit(
                    index=len(units) + 1,
                    heading=heading,
                    body="".join(parts),
                    metadata=heading_metadata(head_text),
                )
            )
        heading, parts = None, []

    for line in raw_text.splitlines(keepends=True):
        content = line.rstrip("\r\n")
        if any(rx.match(content) for rx in heading_res):
            flush()
            heading = line
            skipping = False
        elif heading is not None or skipping:
            if strip_res and any(rx.match(content) for rx in strip_res):
                flush()
                skipping = True
            elif not skipping:
                parts.append(line)
        # else: frontpiece before the first heading, dropped

    flush()
    if not units:
        raise NoScenesFound(
            f"no scene heading matched profile {profile.name!r}; wrong format profile?"
        )
    return units


def word_tokens(text: str) -> list[str]:
    """Lowercased word tokens of length >= 2, in document order."""
    out = []
    for m in WORD_RE.finditer(text):
        tok = m.group(0).lower()
        if len(tok) >= 2:
            out.append(tok)
    return out


def tokenize(unit: SceneUnit, include_heading: bool = True) -> SceneUnit:
    """Return a copy of the unit with its token sequence filled in.

    Heading words (slugline metadata) count as unit text by default.
    """
    text = unit.heading + unit.body if include_heading else unit.body
    return replace(unit, tokens=tuple(word_tokens(text)))


def read_beat_offsets(path: str | Path) -> list[int]:
    """Read a sidecar file of integer body offsets, one per line."""
    offsets = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.strip()
            if not text:
                continue
            try:
                offsets.append(int(text))
            except ValueError:
                raise InvalidBoundaries(f"{path}:{lineno}: not an integer offset: {text!r}")
    return offsets


def load_beats(scene: SceneUnit, beat_boundaries: Sequence[int] | str | Path) -> list[SceneUnit]:
    """Subdivide a scene body at the given offsets into tokenized beats.

    ``beat_boundaries`` is either a list of character offsets into the scene
    body (strictly increasing, strictly inside the body) or the path of an
    offsets sidecar file.  Beat bodies concatenate back to the scene body.
    """
    if isinstance(beat_boundaries, (str, Path)):
        offsets = read_beat_offsets(beat_boundaries)
    else:
        offsets = [int(b) for b in beat_boundaries]

    body = scene.body
    prev = 0
    for off in offsets:
        if off <= prev or off >= len(body):
            raise InvalidBoundaries(
                f"offset {off} not strictly inside (0, {len(body)}) or non-increasing"
            )
        prev = off

    bounds = [0, *offsets, len(body)]
    beats = []
    for k, (lo, hi) in enumerate(zip(bounds, bounds[1:]), start=1):
        piece = body[lo:hi]
        beats.append(
            SceneUnit(index=k, heading="", body=piece, tokens=tuple(word_tokens(piece)))
        )
    return beats


def split_beats_on_marker(scene: SceneUnit, marker: str) -> list[SceneUnit]:
    """Subdivide a scene at each occurrence of a literal delimiter line.

    The marker text stays at the start of the beat it opens, so beat bodies
    still concatenate back to the scene body.
    """
    if not marker:
        raise InvalidBoundaries("empty beat marker")
    offsets = [m.start() for m in re.finditer(re.escape(marker), scene.body) if m.start() > 0]
    return load_beats(scene, offsets)


# ---------------------------------------------------------------------------
# serialization

def units_to_dict(units: Sequence[SceneUnit], source: dict | None = None) -> dict:
    return {
        "schema": UNITS_SCHEMA,
        "source": source or {},
        "units": [
            {
                "index": u.index,
                "heading": u.heading,
                "metadata": dict(sorted(u.metadata.items())),
                "body": u.body,
                "tokens": list(u.tokens),
                "length": u.length,
            }
            for u in units
        ],
    }


def units_from_dict(doc: dict) -> list[SceneUnit]:
    if doc.get("schema") != UNITS_SCHEMA:
        raise ValueError(f"not a units document (schema={doc.get('schema')!r})")
    units = []
    for rec in doc["units"]:
        unit = SceneUnit(
            index=int(rec["index"]),
            heading=rec["heading"],
            body=rec["body"],
            metadata=dict(rec.get("metadata", {})),
            tokens=tuple(rec.get("tokens", ())),
        )
        if "length" in rec and int(rec["length"]) != unit.length:
            raise ValueError(f"unit {unit.index}: stored length != token count")
        units.append(unit)
    return units


def save_units(units: Sequence[SceneUnit], path: str | Path, source: dict | None = None) -> None:
    write_json_atomic(path, units_to_dict(units, source=source))


def load_units(path: str | Path) -> list[SceneUnit]:
    return units_from_dict(read_json(path))


def profile_to_dict(profile: FormatProfile) -> dict:
    return {
        "schema": PROFILE_SCHEMA,
        "name": profile.name,
        "scene_heading_patterns": list(profile.scene_heading_patterns),
        "strip_sections": list(profile.strip_sections),
        "beat_marker": profile.beat_marker,
    }


def profile_from_dict(doc: dict) -> FormatProfile:
    if doc.get("schema") != PROFILE_SCHEMA:
        raise ValueError(f"not a format profile document (schema={doc.get('schema')!r})")
    return FormatProfile(
        name=doc.get("name", "custom"),
        scene_heading_patterns=tuple(doc["scene_heading_patterns"]),
        strip_sections=tuple(doc.get("strip_sections", ())),
        beat_marker=doc.get("beat_marker"),
    )


def resolve_profile(name_or_path: str, config_dir: str | Path | None = None) -> FormatProfile:
    """Look up a profile: built-in name, then <config dir>/<name>.json, then a path.

    The default config directory comes from the SCENESTATS_CONFIG_DIR
    environment variable.
    """
    if name_or_path in BUILTIN_PROFILES:
        return BUILTIN_PROFILES[name_or_path]
    config_dir = config_dir or os.environ.get(CONFIG_DIR_ENV)
    if config_dir:
        candidate = Path(config_dir) / f"{name_or_path}.json"
        if candidate.is_file():
            return profile_from_dict(read_json(candidate))
    if Path(name_or_path).is_file():
        return profile_from_dict(read_json(name_or_path))
    raise FileNotFoundError(
        f"unknown format profile {name_or_path!r} "
        f"(not built-in, not in config dir, not a file)"
    )
