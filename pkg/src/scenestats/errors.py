"""Exception types raised across the analysis pipeline."""


class ScriptAnalysisError(Exception):
    """Base class for all scenestats errors."""


class NoScenesFound(ScriptAnalysisError):
    """No scene heading pattern matched; the format profile is likely wrong."""


class InvalidBoundaries(ScriptAnalysisError):
    """Beat boundaries are not strictly increasing inside the scene body."""


class DegenerateInput(ScriptAnalysisError):
    """Fewer than two units, or an empty vocabulary."""


class EmptyAfterPrune(ScriptAnalysisError):
    """Pruning removed every row or every column."""


class ZeroMass(ScriptAnalysisError):
    """A retained row or column has zero mass; the table was not pruned."""


class NumericalFailure(ScriptAnalysisError):
    """The factor decomposition did not converge."""


class ZeroNormRow(ScriptAnalysisError):
    """A unit projects exactly at the origin and has no orientation."""


class DimensionMismatch(ScriptAnalysisError):
    """Input vectors disagree in dimensionality."""


class InvalidK(ScriptAnalysisError):
    """Requested segment count lies outside 1..n."""


class TooFewUnits(ScriptAnalysisError):
    """The operation needs a longer unit sequence."""
