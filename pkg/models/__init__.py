from .curvature_spec import (
    CertReport, CurvatureSpec, ElemSymRootFamily, GaussPowerFamily, Lambda,
    PowerMeanFamily, WeightedProductFamily,
)
from .errors import CurvFlowError, NumericalAbort
from .estimate_types import BarrierParams, CutoffParams, MonitorReport
from .flow_types import FlowConfig, Snapshot, SupportCurve, SupportTrajectory, Trajectory
from .graph_state import GeomFields, GraphGrid, GraphState

__all__ = [
    'CertReport', 'CurvatureSpec', 'ElemSymRootFamily', 'GaussPowerFamily', 'Lambda',
    'PowerMeanFamily', 'WeightedProductFamily', 'CurvFlowError', 'NumericalAbort',
    'BarrierParams', 'CutoffParams', 'MonitorReport', 'FlowConfig', 'Snapshot',
    'SupportCurve', 'SupportTrajectory', 'Trajectory', 'GeomFields', 'GraphGrid', 'GraphState',
]
