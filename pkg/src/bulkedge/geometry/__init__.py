"""Exact discrete/continuum geometry: good sets, boundary tracing on the
quarter lattice, orientation, components, transversality diagnostics and
intersection numbers."""

from .tails import (Tail, Empty, Full, HalfPlane, Quadrant, VStrip,
                    EndClassificationError, parse_tail)
from .sets import DiscreteSet, perturb_compactly, RIM_BELT
from .tracing import (QuarterPoint, CurveEnd, BoundaryCurve, TracingError,
                      good_set_boundary, orient_with_set_on_left, TRACE_MARGIN)
from .components import Component, connected_components, complement_components
from .intersection import (TransversalityReport, IntersectionReport,
                           boundary_d1_field, psi_field, psi_argmin,
                           transversality_profile, curve_contribution,
                           intersection_number_simple, intersection_number)

__all__ = [
    "Tail", "Empty", "Full", "HalfPlane", "Quadrant", "VStrip",
    "EndClassificationError", "parse_tail",
    "DiscreteSet", "perturb_compactly", "RIM_BELT",
    "QuarterPoint", "CurveEnd", "BoundaryCurve", "TracingError",
    "good_set_boundary", "orient_with_set_on_left", "TRACE_MARGIN",
    "Component", "connected_components", "complement_components",
    "TransversalityReport", "IntersectionReport",
    "boundary_d1_field", "psi_field", "psi_argmin",
    "transversality_profile", "curve_contribution",
    "intersection_number_simple", "intersection_number",
]
