"""Cone metrics, dilation families, and seeded numerical verification.

The library builds metric structures around a chosen center: cones over
bounded bases, scaling families that multiply distances exactly, radial
decompositions of spaces under contracting actions, small-scale limit
metrics, and translation-invariant group metrics with homogeneous norms.
Every constructed law is verified on seeded samples and reported with
worst-case witnesses.
"""

from .cone_builder import (ConePoint, ConeSpace, build_cone, canonical_family,
                           cone_distance, unit_sphere_check)
from .derived_metrics import (BiLipschitzEstimate, GroupStructure,
                              check_group_axioms, estimate_local_bilipschitz,
                              homogeneous_norm, limsup_metric, sup_metric,
                              verify_conical_group, verify_limsup_metric)
from .dilation_family import (DilationFamily, IndexSetDescriptor, ModulusEstimate,
                              adjoin_zero, check_pure_set, continuity_modulus,
                              extend_to_closure, verify_dilation_family,
                              verify_linearity)
from .errors import (DecompositionError, DilatiaError, DomainError,
                     HypothesisViolationError, NonConvergenceError,
                     PreconditionError, SpecError)
from .metric_core import (DiameterEstimate, Space, ToleranceConfig, Window,
                          check_metric_axioms, diameter, distance,
                          heisenberg_inverse, heisenberg_multiply, koranyi_gauge,
                          rescale_to_diameter)
from .radial_decomposition import (ConeCoords, RadialAction, boundary_set,
                                   cone_coordinates, default_epsilon, gamma,
                                   gamma_grid_oracle, verify_cone_homeomorphism,
                                   verify_metric_cone, verify_partition,
                                   verify_radial_action)
from .report import CheckRecord, VerificationReport
from .space_gallery import (GALLERY, GalleryEntry, build_family, gallery_build,
                            gallery_entries, heisenberg_group)

__version__ = "0.1.0"

__all__ = [
    "BiLipschitzEstimate", "CheckRecord", "ConeCoords", "ConePoint", "ConeSpace",
    "DecompositionError", "DiameterEstimate", "DilatiaError", "DilationFamily",
    "DomainError", "GALLERY", "GalleryEntry", "GroupStructure",
    "HypothesisViolationError", "IndexSetDescriptor", "ModulusEstimate",
    "NonConvergenceError", "PreconditionError", "RadialAction", "Space",
    "SpecError", "ToleranceConfig", "VerificationReport", "Window",
    "adjoin_zero", "boundary_set", "build_cone", "build_family",
    "canonical_family", "check_group_axioms", "check_metric_axioms",
    "check_pure_set", "cone_coordinates", "cone_distance", "continuity_modulus",
    "default_epsilon", "diameter", "distance", "estimate_local_bilipschitz",
    "extend_to_closure", "gallery_build", "gallery_entries", "gamma",
    "gamma_grid_oracle", "heisenberg_group", "heisenberg_inverse",
    "heisenberg_multiply", "homogeneous_norm", "koranyi_gauge", "limsup_metric",
    "rescale_to_diameter", "sup_metric", "unit_sphere_check",
    "verify_cone_homeomorphism", "verify_conical_group", "verify_dilation_family",
    "verify_limsup_metric", "verify_linearity", "verify_metric_cone",
    "verify_partition", "verify_radial_action",
]
