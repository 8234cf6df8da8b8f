from cnrq_lab.oracle.exact import (
    ExplicitModel,
    exact_policy_evaluation,
    exact_stationary,
    truncated_series_evaluation,
    value_iteration,
)
from cnrq_lab.oracle.report import oracle_report
from cnrq_lab.oracle.vertices import ce_vertex_enumerate

__all__ = [
    "ExplicitModel",
    "ce_vertex_enumerate",
    "exact_policy_evaluation",
    "exact_stationary",
    "oracle_report",
    "truncated_series_evaluation",
    "value_iteration",
]
