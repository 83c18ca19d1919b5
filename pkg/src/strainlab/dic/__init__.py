from .config import DicConfig, DisplacementField, SequenceReport
from .engine import correlate_pair, correlate_sequence
from .kernels import active_backend

__all__ = [
    "DicConfig",
    "DisplacementField",
    "SequenceReport",
    "correlate_pair",
    "correlate_sequence",
    "active_backend",
]
