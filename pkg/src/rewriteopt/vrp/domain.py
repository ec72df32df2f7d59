"""Vehicle routing as a rewriting domain.

State: (instance, visit sequence). Regions: customer positions in the
sequence. Rules: "relocate to immediately after position k" where k ranges
over all other positions; the rule space therefore scales with the current
sequence length. Cost: total Euclidean tour length.
"""

from __future__ import annotations

from ..core.domain import Domain
from .instance import VrpInstance
from .route import Route, route_cost, vrp_rewrite


class VrpState:
    __slots__ = ("instance", "seq")

    def __init__(self, instance: VrpInstance, seq: Route):
        self.instance = instance
        self.seq = seq


class VrpDomain(Domain):
    name = "vrp"

    def region_set(self, state: VrpState) -> list[int]:
        return [i for i, v in enumerate(state.seq) if v != 0]

    def rule_count(self, state: VrpState) -> int:
        # rule r = "insert after the r-th other position"
        return len(state.seq) - 1

    def _target_position(self, state: VrpState, region: int, rule: int) -> int:
        # skip the region's own slot so rules enumerate the *other* positions
        return rule if rule < region else rule + 1

    def applicable(self, state: VrpState, region: int, rule: int) -> bool:
        if rule < 0 or rule >= len(state.seq) - 1:
            return False
        return state.seq[region] != 0

    def apply(self, state: VrpState, region: int, rule: int) -> VrpState:
        target = self._target_position(state, region, rule)
        seq = vrp_rewrite(state.seq, region, target, state.instance)
        return VrpState(state.instance, seq)

    def cost(self, state: VrpState) -> float:
        return route_cost(state.seq, state.instance)

    def serialize_state(self, state: VrpState) -> dict:
        return {"instance": state.instance.to_json(), "sequence": list(state.seq)}

    def deserialize_state(self, obj: dict) -> VrpState:
        return VrpState(VrpInstance.from_json(obj["instance"]), tuple(obj["sequence"]))

    def initial_state(self, instance: VrpInstance) -> VrpState:
        from .route import nn_initial_route

        return VrpState(instance, nn_initial_route(instance))
