"""Label-space partition selection for label-partitioned GLMB tracking.

Gates (axis-aligned rectangles around each label's predicted measurement)
are self-joined on a uniform grid whose tiles keep four secondary classes,
which finds every intersecting pair without duplicate reports.  Connected
components of the result are the label groups.
"""

from labelpart._backend import BACKENDS, get_kernels
from labelpart._backend import kernels as _kernels
from labelpart.baselines import brute_force_join, build_ig, build_rtree, ig_join, rtree_join
from labelpart.datagen import DatasetSpec, generate_gaussians, generate_rects
from labelpart.geometry import (
    GaussianComponent2D,
    GaussianMixture2D,
    Interval,
    Rect,
    RectArrays,
    gmbr_from_mixture,
    interval_overlap,
    mbr_union,
    rect_intersects,
)
from labelpart.grid_index import GridConfig, GridIndex, SecondaryClass, TileId, build_grid
from labelpart.label_grouping import (
    LabelPartition,
    PartitionLoopConfig,
    connected_components,
    select_label_partition,
    validate_partition,
)
from labelpart.two_layer_join import AdjacencyMap, CostCounters, query, two_layer_label_partition

BACKEND = _kernels.NAME

__version__ = "0.1.0"
