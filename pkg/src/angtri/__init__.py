"""Closed-form globally optimal two-view triangulation under angular reprojection error."""

from .cheirality import (
    CheiralityClass,
    CheiralityReport,
    Observation,
    Thresholds,
    cheirality_report,
    check_cheirality,
    classify_observation,
    compute_depths,
    triangulate_with_retry,
)
from .errors import (
    BothNormalsDegenerate,
    ChainNotIntersecting,
    DegenerateBaseline,
    DegenerateProjection,
    EpipoleDegenerate,
    GeometryError,
    InfeasibleSpec,
    ParallelLines,
    SingularSpectrum,
    ZeroVector,
)
from .geom_core import (
    Line3,
    Plane3,
    angle_between_directions,
    closest_points,
    min_pivot_angle,
    point_plane_distance,
    project_direction_onto_plane,
    skew_line_distance,
    triple_product,
)
from .triangulators import (
    correct,
    correct_l1,
    correct_l2,
    correct_linf,
    epipolar_residual,
    method_cost,
    middle_right_singular_vector,
    triangulate,
    triangulate_batch,
)
from .types import Branch, CorrectionResult, Method, RelativeGeometry, Status, TriangulationOutput

__version__ = "0.1.0"
