"""polygf: exact generating functions and censuses for almost-convex
lattice polygons.

The package couples three independent routes to the same numbers — exact
truncated series built from closed forms, composite constructions written
in a small expression language, and brute-force polygon enumeration — so
each route checks the others.
"""

__version__ = "0.1.0"

from .series import (
    TruncatedSeries,
    Rat,
    SeriesError,
    VariableMismatchError,
    NonInvertibleError,
    OutOfTruncationError,
    InsufficientCapError,
    TruncationLossWarning,
    add,
    mul,
    divide,
    sqrt,
    diff,
    substitute,
    half_perimeter,
    hadamard,
    hadamard_join,
    coefficient,
)
from .census import (
    Polygon,
    PolygonError,
    Indent,
    Classification,
    ClassificationError,
    CensusTable,
    CensusResourceError,
    SnapshotError,
    classify,
    concavity_index,
    closest_side_assignment,
    coarse_partition,
    enumerate_census,
    anisotropic_table,
    census_words,
    reference_polygons,
)

__all__ = [
    "TruncatedSeries",
    "Rat",
    "SeriesError",
    "VariableMismatchError",
    "NonInvertibleError",
    "OutOfTruncationError",
    "InsufficientCapError",
    "TruncationLossWarning",
    "add",
    "mul",
    "divide",
    "sqrt",
    "diff",
    "substitute",
    "half_perimeter",
    "hadamard",
    "hadamard_join",
    "coefficient",
    "Polygon",
    "PolygonError",
    "Indent",
    "Classification",
    "ClassificationError",
    "CensusTable",
    "CensusResourceError",
    "SnapshotError",
    "classify",
    "concavity_index",
    "closest_side_assignment",
    "coarse_partition",
    "enumerate_census",
    "anisotropic_table",
    "census_words",
    "reference_polygons",
    "__version__",
]
