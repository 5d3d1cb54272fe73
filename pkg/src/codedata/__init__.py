"""Controlled code <-> data transitions for update rules"""

from .bridge import (
    BindingSet, ExecutionMode, capture_parse, execute, execute_bound, execute_closed, interpolate
)
from .evaluator import CaptureChannel

__all__ = [
    'BindingSet', 'ExecutionMode', 'CaptureChannel', 'capture_parse',
    'execute', 'execute_bound', 'execute_closed', 'interpolate'
]
