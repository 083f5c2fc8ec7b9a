"""Planar least gradient problems solved and verified through optimal transport."""
from .admissibility import (AdmissibilityReport, check_A2, check_H2, check_H3, check_H3prime,
                            check_L2_A3, check_S, threshold_scan)
from .decomposition import ArcDecomposition, ChiPair, EPair, GammaPair, decompose, verify_H1
from .errors import InputError, LgotError
from .estimator import KantorovichOracle, LeastGradientSolver
from .fields import (TransportPlan, boundary_mass, divergence_residual, make_plan, rasterize)
from .geometry import (ArcPiece, BoundaryArc, BoundaryCurve, LinePiece, Point2, classify_point,
                       convex_hull_region, convexity_report, open_segment_in_domain, point_at,
                       segments_cross_interior)
from .oracle import (cross_cell_mass, cyclical_violation, duality_gap, ray_support_audit,
                     solve_assignment)
from .partition import Cell, Family, Partition, auto_refine_until, refine, validate
from .pipeline import RunReport, run, scan
from .reconstruction import evaluate_u, rotation_check, total_variation, u_grid
from .scenarios import Scenario, builtin, load, resolve
from .trace import (SignedBoundaryMeasure, TraceFunction, inverse_cdf_sample, measure_of_arc,
                    monotone_decomposition, tangential_derivative, tv_of_arc)
from .transport_map import TransportMap, build, pushforward_distance

__version__ = "0.1.0"

__all__ = [
    "AdmissibilityReport",
    "ArcDecomposition",
    "ArcPiece",
    "auto_refine_until",
    "boundary_mass",
    "BoundaryArc",
    "BoundaryCurve",
    "build",
    "builtin",
    "Cell",
    "check_A2",
    "check_H2",
    "check_H3",
    "check_H3prime",
    "check_L2_A3",
    "check_S",
    "ChiPair",
    "classify_point",
    "convex_hull_region",
    "convexity_report",
    "cross_cell_mass",
    "cyclical_violation",
    "decompose",
    "divergence_residual",
    "duality_gap",
    "EPair",
    "evaluate_u",
    "Family",
    "GammaPair",
    "InputError",
    "inverse_cdf_sample",
    "KantorovichOracle",
    "LeastGradientSolver",
    "LgotError",
    "LinePiece",
    "load",
    "make_plan",
    "measure_of_arc",
    "monotone_decomposition",
    "open_segment_in_domain",
    "Partition",
    "Point2",
    "point_at",
    "pushforward_distance",
    "rasterize",
    "ray_support_audit",
    "refine",
    "resolve",
    "rotation_check",
    "run",
    "RunReport",
    "scan",
    "Scenario",
    "segments_cross_interior",
    "SignedBoundaryMeasure",
    "solve_assignment",
    "tangential_derivative",
    "threshold_scan",
    "total_variation",
    "TraceFunction",
    "TransportMap",
    "TransportPlan",
    "tv_of_arc",
    "u_grid",
    "validate",
    "verify_H1",
]
