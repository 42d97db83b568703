"""Numerical laboratory for metric cotype in barycentric metric spaces.

Modules
-------
spaces       metric backends (ℓ_p, finite, trees, snowflakes, unions, products, Wasserstein)
measures     finitely supported measures, barycenter maps, β estimation
martingales  dyadic martingales on the sign cube
cotype       the torus cotype functionals, the main inequality and its proof terms
embeddings   grids, tori, distortion and the spiral obstruction
graphgap     spectral-gap ratios of graph-indexed configurations
cli          ``cotype-lab`` experiment runner
"""

from .cotype import (
    BudgetExceeded,
    CotypeReport,
    QuadraticInequality,
    TorusFunction,
    check_equivalence_chain,
    cotype_lhs,
    cotype_rhs,
    decompose_main_proof,
    estimate_cotype_constant,
    make_torus_function,
    theorem_bound,
    verify_main_inequality,
)
from .embeddings import (
    FiniteEmbedding,
    build_obstruction_function,
    distortion,
    grid_distortion_lower_bound,
    make_trivial_embedding,
    p_alpha_bounds,
    psi_embedding,
    torus_metric,
)
from .graphgap import GapReport, RegularGraph, relative_spectral_gap, spectral_gap
from .martingales import CubeMartingale, build_cube_martingale, check_monotonicity, check_pisier
from .measures import (
    FinitelySupportedMeasure,
    FrechetQMean,
    LinearMean,
    Partition,
    TreeMean2,
    barycenter,
    conditional_barycenter,
    estimate_beta,
    sample_rng,
)
from .spaces import (
    DisjointUnion,
    FiniteSpace,
    LpSpace,
    MetricError,
    MetricSpace,
    PythagoreanProduct,
    SnowflakeSpace,
    TreeSpace,
    UnsupportedOperation,
    WassersteinSpace,
    build_space,
)

__version__ = "0.1.0"
