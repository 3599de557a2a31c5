"""Finite-model laboratory for nearly disjointness preserving operators."""
from .bounds import band_index, bound_table, gamma, o_X, o_prime_X, omega
from .calculus import (dist_to_wcm, epsilon_exact, nearest_wcm, op_norm,
                       row_cost, row_max_disjoint_product, wcm_feasible)
from .model import (Certificate, FunctionalVec, InstanceBundle, ModelError,
                    OperatorMatrix, SpaceX, TopGraphY, WCMapModel,
                    operator_distance, wcm_apply, wcm_as_matrix)

__version__ = "0.1.0"
