"""Constrained second-order stationarity toolkit.

Exact first/second-order stationarity measures over polytope-and-ball
step sets, a dynamic second-order Frank-Wolfe solver, the projected
gradient descent saddle-trap demonstration, and the copositivity /
stable-set correspondence, all at desk scale with brute-force oracles.
"""

from .geometry import (
    ActiveSet,
    AffineSlice,
    EmptyPolytopeError,
    Polytope,
    box,
    contains,
    orthant,
    project_halfspace,
    project_polytope,
    residual,
    slice_polytope,
    unconstrained,
)
from .hardness import (
    CopositivityInstance,
    CorrespondenceReport,
    Graph,
    build_instance,
    check_correspondence,
    has_stable_set,
    min_orthant_ball,
    support_minimum,
)
from .oracles import (
    ObjectiveOracle,
    OracleConstants,
    Problem,
    counterexample_oracle,
    counterexample_problem,
    fd_check_gradient,
    fd_check_hessian,
    load_problem,
    quad1d_problem,
    quadratic_oracle,
    save_problem,
)
from .pgd import (
    PgdConfig,
    basin_condition,
    basin_sweep,
    g_envelope,
    line_invariance_check,
    online_update,
    pgd_step,
    run_pgd,
)
from .sofw import (
    IterationRecord,
    IterationTrace,
    SofwConfig,
    complexity_bound,
    run_sofw,
    sofw_step,
    verify_decrease,
)
from .stationarity import (
    StationarityReport,
    classify,
    first_order_measure,
    second_order_measure,
)
from .subsolvers import (
    DirectionSolution,
    TrsSolution,
    brute_force_direction,
    solve_lmo,
    solve_qmo,
    solve_trs,
)

__version__ = "0.1.0"
