"""Coordinate descent for difference-of-convex minimization.

Problems have the form F(x) = f(x) + h(x) - g(x): f smooth convex with known
coordinate Lipschitz constants, h a simple separable convex term, g a convex
term subtracted off.  The solvers move one coordinate at a time and solve the
resulting nonconvex one-dimensional subproblem *globally* by exact breakpoint
search, which yields stronger stationary points than linearizing g.
"""

from .linalg import (
    DimensionError,
    SparseColMatrix,
    cardano_K,
    gram_diagonal,
    matvec,
    read_matrix,
    real_roots,
    rmatvec,
    spectral_norm_sq,
    sym_eig,
    write_matrix,
)
from .prox1d import (
    ProxResult,
    prox_convex_sca,
    prox_l1_compose,
    prox_l2_compose,
    prox_linf_compose,
    prox_relu_compose,
    prox_top_s,
)
from .problem import (
    Box,
    DcProblem,
    L1,
    L1Compose,
    L2Compose,
    LeastSquares,
    LInfCompose,
    QuadForm,
    ReluCompose,
    ReluLeastSquares,
    ScaledNorm2,
    TopS,
    Zero,
    build_approx_binary,
    build_approx_sparse,
    build_eig_lp,
    build_glr,
    build_pca,
    g_subgrad_interval,
    g_subgradient,
    rescale_solutions,
)
from .solvers import (
    NumericalError,
    SolverConfig,
    Trace,
    cd_step_sca,
    cd_step_snca,
    default_x0,
    run_baseline,
    run_cd,
)
from .optimality import (
    EnumRow,
    StationaryReport,
    classify,
    cws_residual,
    enumerate_problem59,
    enumerate_problem61,
    enumerate_problem62,
    hessian_containment,
    pca_closed_form,
    pca_gradient,
    pca_hessian,
    pca_hessian_bounds,
    problem59,
    quadratic_growth_check,
    sca_residual,
)
from .bench import (
    DatasetSpec,
    ExperimentSpec,
    build_application,
    gen_matrix,
    gen_signal_and_obs,
    run_experiment,
    run_solver,
    write_report,
)

__version__ = "0.1.0"
