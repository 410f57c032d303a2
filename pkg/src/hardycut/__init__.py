"""Trace Hardy toolkit for cut domains.

Computes and verifies, at desk scale, the objects attached to a jump-trace
Hardy inequality: the singular weight on a cut and its distance lower
bound, the sharp variational constant on slit finite-element meshes, the
critical coupling of jump-penalized forms, heat-flow decay certificates,
and the scaling identities of unbounded sector cones.
"""

__version__ = "0.1.0"

from .geometry import (
    ConeGeometry,
    CutGeometry,
    DensityEstimate,
    FlatCut3D,
    build_circle_cut,
    build_flat_annulus_cut,
    build_rectangle_slit,
    cone_distances,
    density_estimate,
    parse_geometry,
)
from .heat import DecayCertificate, HeatTrajectory, decay_check, evolve, initial_data
from .slitmesh import (
    AssembledForms,
    SlitMesh,
    assemble,
    generate_mesh,
    merge_slit,
    read_mesh,
    refine,
    square_mesh,
    validate_mesh,
    write_mesh,
)
from .spectral import (
    SpectralReport,
    convergence_study,
    delta_prime_critical,
    delta_prime_critical_bisect,
    delta_prime_min_eig,
    hardy_constant,
    neumann_spectrum,
    spectral_report,
)
from .unbounded import (
    HalfspaceCertificate,
    PennyProfile,
    ShellCheck,
    TestFunction,
    classical_hardy_constant,
    cone_distance_bound_suite,
    gamma_positive,
    halfspace_jump_check,
    kato_constant,
    penny_profile,
    shell_scaling_check,
    sphere_area,
)
from .weight import (
    InfiniteWeightError,
    LowerBoundCertificate,
    OmegaStarResult,
    WeightProfile,
    lower_bound_check,
    omega_star,
    unit_circle_weight,
    weight_at,
    weight_profile,
)

__all__ = [name for name in dir() if not name.startswith("_")]
