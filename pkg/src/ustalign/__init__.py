"""ustalign: globally optimal temporal reparameterization of signals.

Aligns time-evolving signals by reparameterizing each onto the universal
standard timescale in O(N), quotients out SE(3) nuisance motion through
invariants, verifies the underlying variational optimality claims
numerically, and ships a dynamic-time-warping baseline for comparison.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: F401
    AngleNearPi,
    BadRotation,
    DegenerateSignal,
    EmptyTemplateSet,
    GridMismatch,
    IllConditioned,
    NonMonotoneTime,
    ParseError,
    SchemaMismatch,
    SignalTooShort,
    SingularWeightIntegral,
    SpaceMismatch,
    StepTooLarge,
    UstAlignError,
)
from .metric_spaces import (  # noqa: F401
    Signal,
    Space,
    TimeGrid,
    Warp,
    distance,
    interpolate,
    matrix_space,
    random_warp,
    scalar_space,
    se3_product_space,
    se3_space,
    signal,
    space_from_tag,
    vector_space,
    warp_compose,
    warp_identity,
    warp_inverse,
)
from .reparam import (  # noqa: F401
    SpeedTable,
    UstResult,
    apply_warp,
    closed_form_speed_check,
    functional_cost,
    optimal_warp,
    speed_table,
    speed_table_from_profile,
    ust,
)
