"""Approximate shortest tours that visit convex regions in a fixed order."""

from .approx import (ApproxBracket, RefusedError, constant_approx, pseudo_approx, solve,
                     solve_balls, solve_convex_unions, solve_fat, solve_fat_grouped,
                     trivial_approx)
from .certify import (Certificate, GuardError, brute_oracle, dual_certificate, refine_local,
                      reflection_residual)
from .dp import InfeasibleError, monotone_transition, solve_disjoint_dp, solve_intersecting_dp
from .generators import gen_random_disjoint_balls, gen_tangent_construction
from .geometry import (Ball, Box, ConvexPolygon, FatMeta, GeometryError, Instance, Segment, Tour,
                       Union, is_valid_tour, tour_length)
from .instance_io import InstanceFormatError, ResultFile, read_instance, write_instance

__version__ = "0.1.0"

__all__ = [
    "ApproxBracket", "Ball", "Box", "Certificate", "ConvexPolygon", "FatMeta", "GeometryError",
    "GuardError", "InfeasibleError", "Instance", "InstanceFormatError", "RefusedError",
    "ResultFile", "Segment", "Tour", "Union", "brute_oracle", "constant_approx",
    "dual_certificate", "gen_random_disjoint_balls", "gen_tangent_construction",
    "is_valid_tour", "monotone_transition", "pseudo_approx", "read_instance", "refine_local",
    "reflection_residual", "solve", "solve_balls", "solve_convex_unions",
    "solve_disjoint_dp", "solve_fat", "solve_fat_grouped", "solve_intersecting_dp",
    "tour_length", "trivial_approx", "write_instance",
]
