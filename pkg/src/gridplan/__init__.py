"""Planning compliant transitions between power grid configurations."""

from .compliance import ComplianceReport, check_compliance, is_compliant, is_radial, is_radial_by_count
from .generator import GenConfig, generate_instance
from .grid import Add, Edge, EdgeState, NodeKind, Plan, PowerGrid, Remove, Switch, make_grid, plan_cost
from .instance_io import Instance, parse_instance, parse_plan, serialize_instance, serialize_plan
from .planner import Mode, Objective, Outcome, SolveConfig, SolveResult, solve, solve_bounded
from .verify import ValidationReport, oracle_shortest, validate_plan

__version__ = "0.1.0"

__all__ = [
    "Add", "ComplianceReport", "Edge", "EdgeState", "GenConfig", "Instance", "Mode", "NodeKind",
    "Objective", "Outcome", "Plan", "PowerGrid", "Remove", "SolveConfig", "SolveResult", "Switch",
    "ValidationReport", "check_compliance", "generate_instance", "is_compliant", "is_radial",
    "is_radial_by_count", "make_grid", "oracle_shortest", "parse_instance", "parse_plan", "plan_cost",
    "serialize_instance", "serialize_plan", "solve", "solve_bounded", "validate_plan",
]
