"""Restricted Chebyshev radii and centers of finite sets over convex sets.

Exact LP path for max-norm families over polyhedral sets, conic and
iterative paths for l_p blocks, plus tools for direct sums, the S(F, delta)
stability functional, continuity probing and a brute-force grid oracle.
"""
from .domain import (AffineSubspace, BlockProduct, HPolytope, Polytope, SubspaceBall,
                     WholeSpace, ball_intersection, contains, distance_to_set)
from .errors import CapabilityError, ChebyError, InstanceError, PreconditionError, SolverError
from .norms import (DirectSum, MaxNorm, PNorm, PointSet, convexity_modulus, distance,
                    farthest_radius, hausdorff_finite)
from .solver import CenterSolution, amir_iterate, enlargement, solve, solve_polyhedral, \
    solve_uniformly_convex

__version__ = "0.1.0"

__all__ = [
    "AffineSubspace", "BlockProduct", "HPolytope", "Polytope", "SubspaceBall", "WholeSpace",
    "ball_intersection", "contains", "distance_to_set", "CapabilityError", "ChebyError",
    "InstanceError", "PreconditionError", "SolverError", "DirectSum", "MaxNorm", "PNorm",
    "PointSet", "convexity_modulus", "distance", "farthest_radius", "hausdorff_finite",
    "CenterSolution", "amir_iterate", "enlargement", "solve", "solve_polyhedral",
    "solve_uniformly_convex",
]
