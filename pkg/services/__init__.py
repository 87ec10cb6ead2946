from .symfun_service import check_condition1
from .geometry_service import geom_fields
from .flow_service import FlowRunner
from .support_flow_service import run_support_flow
from .estimates_service import build_monitor, run_monitors
from .barrier_service import barrier_supersolution_check, maximal_delta

__all__ = [
    'check_condition1', 'geom_fields', 'FlowRunner', 'run_support_flow',
    'build_monitor', 'run_monitors', 'barrier_supersolution_check', 'maximal_delta',
]
