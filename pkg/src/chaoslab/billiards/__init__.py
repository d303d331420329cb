"""Planar billiards: tables, collision dynamics, sampling and cusp constants."""
from .geometry import ARC, CUSP, SEGMENT, BilliardTable, BoundaryPiece, arc, cusp_curve, segment
from .presets import PRESETS, build_preset
