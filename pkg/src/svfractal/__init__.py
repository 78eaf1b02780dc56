"""Set-valued alpha-fractal functions over countable partitions.

Build ``Phi^alpha`` as the fixed point of the Read-Bajraktarevic operator,
view its graph as the attractor of a countable IFS, sample the invariant
measure by chaos game, and bound the graph's Hausdorff dimension.
"""

from .approximation import ErrorReport, OrderReport, check_error, check_order_preservation, error_bound
from .cifs import (
    GraphCloud,
    GraphPoint,
    apply_G,
    apply_G_cloud,
    attractor_defect,
    d_metric,
    graph_cloud,
    graph_metric,
    verify_contraction,
)
from .dimension import (
    DimensionReport,
    RatioSequence,
    box_count_estimate,
    dimension_report,
    moran_solve_finite,
    s_star,
    s_upper,
)
from .errors import *  # noqa: F401,F403
from .expr import evaluate, parse
from .intervals import (
    CompactSet,
    ConvexCompact,
    Interval,
    diameter,
    hausdorff_distance,
    minkowski_sum,
    norm_to_zero,
    scale,
    set_difference,
    subset_leq,
)
from .measure import (
    EmpiricalMeasure,
    ProbabilityVector,
    chaos_game,
    mk_distance,
    self_similarity_defect,
    support_check,
)
from .partition import INF, AffineMap, Partition
from .rb import (
    FractalFunction,
    FractalSystem,
    FractalTemplate,
    apply_rb,
    continuity_bound,
    fixed_point,
    fractal_operator,
    self_residual,
)
from .setfunc import SetFunction, base_function, endpoint_defect, leq, norm_inf, sup_metric

__version__ = "0.1.0"
