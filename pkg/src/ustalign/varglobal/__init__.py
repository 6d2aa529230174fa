"""Constructive verification of the bootstrapped-optimality and joint
nuisance-motion/timescale theorems on synthetic image-flow scenes."""

from .bootstrap import (  # noqa: F401
    COUPLING_SYMMETRY_TOL,
    BootstrapProblem,
    BootstrapSolution,
    Theorem1Form,
    block_metric,
    bootstrap_cost,
    bootstrap_solution,
    check_coupling_symmetry,
    coupling_cost,
    el_residual,
)
from .euler_poincare import (  # noqa: F401
    QuadraticGroupLagrangian,
    SequentialSolution,
    assemble_M_b_c,
    completed_square_identity,
    coupled_residuals,
    ep_equation_residual,
    ep_free_solution,
    g2_profile,
    group_flow_cost,
    theorem3_pipeline,
)
from .groups import PlaneGroup, generator_fields, plane_group, se2, translation2  # noqa: F401
from .scenes import (  # noqa: F401
    GaussianBlobScene,
    bunched_motion_scene,
    pulsing_scene,
    read_scene,
    uniform_drift_scene,
    write_scene,
)
