from .lovejoy import LovejoyResult, grid_point_count, solve_lovejoy
from .sarsop import AlphaSet, CheckResult, ValueBounds, solve_sarsop
from .sawtooth import SawtoothBound
from .values import (
    AlphaVector,
    AlphaVectorPolicy,
    CompiledModel,
    blind_alphas,
    mdp_value_iteration,
    policy_action,
    solve_fib,
    solve_qmdp,
)

__all__ = [
    "AlphaSet",
    "AlphaVector",
    "AlphaVectorPolicy",
    "CheckResult",
    "CompiledModel",
    "LovejoyResult",
    "SawtoothBound",
    "ValueBounds",
    "blind_alphas",
    "grid_point_count",
    "mdp_value_iteration",
    "policy_action",
    "solve_fib",
    "solve_lovejoy",
    "solve_qmdp",
    "solve_sarsop",
]
