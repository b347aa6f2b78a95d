"""Exception types shared across the toolkit."""


class TopogapError(Exception):
    """Base class for all toolkit errors."""


# activation_io

class MalformedFileError(TopogapError):
    """Activation file has a bad magic, version, or is truncated/degenerate."""


class NonFiniteEntryError(TopogapError):
    """An activation entry is NaN or infinite."""

    def __init__(self, row: int, col: int):
        self.row = row
        self.col = col
        super().__init__(f"non-finite activation at row {row}, column {col}")


class AllNodesConstantError(TopogapError):
    """Every activation row has (numerically) zero variance."""


class SizeTooLargeError(TopogapError):
    """Requested sample size exceeds the available population."""


class LabelAbsentError(TopogapError):
    """No input column carries the requested class label."""


# functional_graph

class ZeroVarianceRowError(TopogapError):
    """A constant activation row reached the correlation computation."""


class TooFewInputsError(TopogapError):
    """Correlation needs at least two input columns."""


class AlreadyCorrectedError(TopogapError):
    """Metric correction applied twice."""


class InconsistentScoresError(TopogapError):
    """Importance scores do not sum to the number of inputs."""


class IndexOutOfRangeError(TopogapError):
    """Node index outside the graph, or repeated."""


# persistence_engine

class TooManyVerticesError(TopogapError):
    """Vertex count exceeds the configured cap for this computation."""


# summaries

class EmptyDiagramError(TopogapError):
    """Summary undefined on an empty persistence diagram."""


class ZeroTotalLifeError(TopogapError):
    """Persistence entropy undefined when every lifetime is zero."""


# stats_pipeline

class LengthMismatchError(TopogapError):
    """Summary vectors of differing lengths cannot be bootstrapped together."""


class DimensionMismatchError(TopogapError):
    """Feature matrix and target vector shapes disagree."""


class ZeroVarianceTargetError(TopogapError):
    """R^2 undefined when all actual values coincide."""


class TooFewModelsError(TopogapError):
    """5x2 cross-validation needs at least four models."""


class FoldMismatchError(TopogapError):
    """Paired 5x2 test requires both results on identical partitions."""


# cli / pipeline

class MissingGapLabelError(TopogapError):
    """Model metadata lacks the test accuracy needed for a gap target."""
