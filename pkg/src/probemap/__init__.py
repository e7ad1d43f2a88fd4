"""Road-graph inference from fleet probe data.

Stages: rasterize traces and semantic points into density tiles, segment road
centerlines, merge tiles, skeletonize and vectorize, then refine the graph with
map-matching (gap pruning, stacked-road disambiguation). Evaluation metrics:
GEO, iTOPO, and a dilated-mask Soft F1.
"""

__version__ = "0.1.0"

from .model import (  # noqa: F401
    Edge,
    FleetDataset,
    GnssTrace,
    LocalFrame,
    LocalPoint,
    Provenance,
    RoadGraph,
    SemanticClass,
    SemanticPoint,
    project_to_local,
)
