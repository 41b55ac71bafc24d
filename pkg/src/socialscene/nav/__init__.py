"""Human-aware navigation: social cost fields and receding-horizon planning."""

from .social_cost import CostField, OccupancyGrid, SocialCostParams, approach_pose, build_cost_field, person_cost
from .planner import ControlSequence, NoFeasiblePlan, PlannerBounds, forward_model, plan, rollout_cost

__all__ = [
    "CostField",
    "OccupancyGrid",
    "SocialCostParams",
    "approach_pose",
    "build_cost_field",
    "person_cost",
    "ControlSequence",
    "NoFeasiblePlan",
    "PlannerBounds",
    "forward_model",
    "plan",
    "rollout_cost",
]
