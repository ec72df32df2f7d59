from .instance import VrpInstance, gen_instance
from .route import (
    Route,
    check_route,
    nn_initial_route,
    route_cost,
    vrp_node_embedding,
    vrp_rewrite,
)
from .heuristics import cw_savings, sweep_heuristic
from .oracle import brute_force_optimal
from .domain import VrpDomain

__all__ = [
    "VrpInstance",
    "gen_instance",
    "Route",
    "check_route",
    "route_cost",
    "nn_initial_route",
    "vrp_rewrite",
    "vrp_node_embedding",
    "cw_savings",
    "sweep_heuristic",
    "brute_force_optimal",
    "VrpDomain",
]
