"""Coverage analysis of drone Remote ID broadcasts by fixed ground receivers.

Idealised single-receiver geometry (chords through concentric circles), the
analytic expected coverage under two chord laws, a Monte Carlo check of it,
and a city-scale simulation with path planning plus a hybrid estimator that
bridges the two.
"""

__version__ = "0.1.0"

from .expectation import Case, expected_coverage, expectation_difference, find_crossover
from .geometry import CoverageGeometry, chord_coverage_proportion, polyline_coverage_proportion
from .rng import RngStream

__all__ = [
    "Case",
    "CoverageGeometry",
    "RngStream",
    "chord_coverage_proportion",
    "expectation_difference",
    "expected_coverage",
    "find_crossover",
    "polyline_coverage_proportion",
]
