"""Support-function harmonics for convex bodies.

Submodules
----------
quadrature
    Deterministic quadrature rules on the sphere and the rotation group.
harmonics
    Real harmonic bases, rotation blocks, coefficient expansions.
bodies
    Convex and star body models, support/radial evaluation, the dual
    mixed volume, and the linear change-of-variables identity.
analysis
    Harmonic projections of support functions, mean width, Steiner
    point, cosine-transform multipliers, universality certificates.
decomposition
    Rotational Minkowski decompositions driven by a universal generator.
perturbation
    Near-identity linear-image searches: axis-scaling scans, Fourier
    functionals over GL(2)+, random certified search.
cli
    Command-line front end (``convexharm``).
"""

__version__ = "0.1.0"

from . import analysis, bodies, decomposition, harmonics, perturbation, quadrature
from .analysis import (
    UniversalityCertificate,
    certify,
    cosine_multiplier,
    embed_in_3d,
    expand,
    mean_width,
    project,
    steiner_point,
)
from .bodies import (
    Ball,
    ConvexBody,
    Ellipsoid,
    HarmonicBody,
    LinearImage,
    MinkowskiCombination,
    PlanarLift,
    PlanarShadow,
    Polytope,
    Segment,
    StarBody,
    dual_mixed_volume_minus1,
    star_body,
    transformation_identity_check,
)
from .decomposition import (
    DecompositionResult,
    GeneratorProfile,
    decompose,
    profile_generator,
    residual_report,
    rotation_average_error,
    synthesize_g,
)
from .harmonics import (
    HarmonicExpansion,
    basis_values,
    eval_harmonic,
    harmonic_count,
    rotate_expansion,
    rotation_matrix,
)
from .perturbation import (
    PerturbationSearchReport,
    derivative_identity_check,
    find_universal_image,
    project_to_plane,
    scaled_coefficient,
    scan_axis_scaling,
    support_fourier,
)
from .quadrature import (
    OMEGA,
    RotationQuadrature,
    SphereQuadrature,
    build_rotation_quadrature,
    build_sphere_quadrature,
    direction_grid,
    integrate_sphere,
    rotation_from_angle,
    rotation_from_euler,
)
