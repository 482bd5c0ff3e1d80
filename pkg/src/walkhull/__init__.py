"""Monte-Carlo laboratory for convex hulls of drifting planar random walks.

Simulates ensembles of independent planar random walks, computes exact
hull functionals (perimeter, diameter, area, support, Hausdorff distance),
evaluates the closed-form limit constants of the hull growth laws, and runs
replicated experiments with normality diagnostics on the resulting samples.
"""

__version__ = "0.1.0"

from walkhull.geometry import AngleGrid, ConvexPolygon, Point2, convex_hull
from walkhull.walks import Ensemble, RngStream, StepDistribution, WalkPath

__all__ = [
    "AngleGrid",
    "ConvexPolygon",
    "Point2",
    "convex_hull",
    "Ensemble",
    "RngStream",
    "StepDistribution",
    "WalkPath",
    "__version__",
]
