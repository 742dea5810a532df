"""Quadrature rules for cut cells in 2D.

Active region convention: a level set ``phi`` describes the domain
``{phi <= 0}``.
"""
__version__ = "0.1.0"

from .analysis import (
    ConvergenceFit,
    MappingClass,
    fit_rate,
    max_degree,
    measured_bidegree,
    predict_bidegree,
    required_points,
)
from .bench import (
    METHODS,
    StudyRecord,
    SweepSummary,
    build_rule,
    oracle_integral,
    run_case,
    study_href,
    study_nqp,
    study_sweep,
    verify_catalog,
    write_csv,
)
from .catalog import TestCase, catalog, get_case, parabolas, scaled_monomial
from .dimreduce import GreenConfig, HeightConfig, green_rule, height_rule
from .errors import CutQuadError
from .geometry import (
    BackgroundMesh,
    BoundaryChain,
    CellStatus,
    LevelSet,
    classify_cell,
    edge_roots,
)
from .momentfit import (
    MomentFitConfig,
    MomentSystem,
    hmf_interface_rule,
    hmf_volume_rule,
    lagrange_momentfit_rule,
)
from .poly import Poly1D, Poly2D, RationalBezier, bezier_eval, find_roots_1d
from .quadtree import QuadtreeConfig, quadtree_rule, tessellate_leaf
from .rules import (
    AffineMap2D,
    Gauss1D,
    QuadratureRule,
    gauss_legendre,
    integrate,
    map_rule,
    tensor_rule,
    triangle_rule,
)
