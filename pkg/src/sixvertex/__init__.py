"""Affine and projective invariants of closed convex plane curves, sextactic
points, and Sturm-type zero counts for disconjugate periodic ODEs."""

__version__ = "0.1.0"

from .affine import affine_curvature, affine_length_element, reparametrize_affine
from .curves import ClosedCurve, PlaneTransform, apply_transform, check_convexity
from .periodic import (PeriodicFunction, count_sign_changes, differentiate,
                       integrate_period, locate_zero_clusters)
from .projective import (ProjectiveODE, curve_to_ode, ode_to_curve, projective_curvature,
                         projective_length_element, pull_back_h)
from .settings import DEFAULT_SETTINGS, NumericSettings, load_settings
from .sextactic import (Conic, contact_order, dual_curve, find_sextactic_points,
                        osculating_conic, six_vertices_certificate, verify_lemma3)
from .sturm import (LinearPeriodicODE, certify_corollary, certify_theorem1, certify_theorem2,
                    check_disconjugate, fundamental_system, orthogonal_complement_sample,
                    prescribed_zero_solution)

__all__ = [
    "ClosedCurve", "Conic", "DEFAULT_SETTINGS", "LinearPeriodicODE", "NumericSettings",
    "PeriodicFunction", "PlaneTransform", "ProjectiveODE", "affine_curvature",
    "affine_length_element", "apply_transform", "certify_corollary", "certify_theorem1",
    "certify_theorem2", "check_convexity", "check_disconjugate", "contact_order",
    "count_sign_changes", "curve_to_ode", "differentiate", "dual_curve",
    "find_sextactic_points", "fundamental_system", "integrate_period", "load_settings",
    "locate_zero_clusters", "ode_to_curve", "orthogonal_complement_sample", "osculating_conic",
    "prescribed_zero_solution", "projective_curvature", "projective_length_element",
    "pull_back_h", "reparametrize_affine", "six_vertices_certificate", "verify_lemma3",
]
