"""scenestats: quantitative style and structure of sequential narratives.

Pipeline: scripts are split into ordered scenes (or beats) and tokenized;
a units-by-words table is embedded into a Euclidean factor space under the
chi-squared metric; the sequence is clustered by an order-preserving
complete-link hierarchy; nine style attributes summarize movement,
orientation change, tempo and rhythm; and a seeded permutation test rates
each attribute against randomized scene orders.
"""

__version__ = "0.1.0"

from .bundle import (
    AnalysisBundle,
    analyze_text,
    analyze_units,
    bundle_from_dict,
    bundle_to_dict,
    load_bundle,
    save_bundle,
)
from .ca import (
    CorrespondenceEmbedding,
    ProfileCloud,
    chi2_distance,
    chi2_distances,
    correlations,
    embed,
    make_profiles,
    orientation_matrix,
    total_inertia,
)
from .cluster import Dendrogram, Merge, cluster, cluster_by_orientation, cut, to_newick
from .contingency import (
    ContingencyTable,
    PruneLog,
    ZipfSummary,
    build_table,
    prune,
    to_presence,
    zipf_summary,
)
from .errors import (
    DegenerateInput,
    DimensionMismatch,
    EmptyAfterPrune,
    InvalidBoundaries,
    InvalidK,
    NoScenesFound,
    NumericalFailure,
    ScriptAnalysisError,
    TooFewUnits,
    ZeroMass,
    ZeroNormRow,
)
from .ingest import (
    BUILTIN_PROFILES,
    FormatProfile,
    SceneUnit,
    load_beats,
    resolve_profile,
    split_beats_on_marker,
    split_scenes,
    tokenize,
    word_tokens,
)
from .randomize import (
    AttributeComparison,
    RandomizationReport,
    SignificanceTable,
    randomize_test,
    repeat_randomize_test,
    summarize_table,
)
from .style import (
    ATTRIBUTE_NAMES,
    StyleProfile,
    movement_attrs,
    orientation_attrs,
    rhythm_attrs,
    style_profile,
    tempo_attrs,
)
