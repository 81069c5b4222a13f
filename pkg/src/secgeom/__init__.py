"""Numerical laboratory for L2 holomorphic sections on model surfaces.

Builds orthonormal section spaces on three model geometries (punctured
disk, round sphere, sphere with one cusp), samples random sections under
configurable coefficient ensembles, and runs Monte Carlo experiments on
kernel asymptotics, zero statistics, and hole probabilities.

Chart normalization, fixed once and used everywhere: areas are planar
Lebesgue measure dA = dx dy, and the area form convention is
i dz ^ dzbar = 2 dA.  See `secgeom.models` for the resulting densities.
"""

from secgeom.models import (
    ModelKind,
    ModelSpace,
    punctured_disk,
    fubini_study_sphere,
    cusped_sphere,
    ChartDisk,
    ChartAnnulus,
    SphericalCap,
    ChartRectangle,
    DomainError,
    bundle_weight,
    volume_density,
    curvature_ratio,
    area_L,
    local_distance,
    verify_conditions,
)
from secgeom.hilbert import (
    SectionBasis,
    KernelValue,
    RandomSection,
    build_basis,
    dimension_check,
    evaluate_section,
    bergman_density,
    bergman_kernel,
    normalized_kernel,
    near_diagonal_report,
    reproducing_check,
    basis_to_json,
    basis_from_json,
)
from secgeom.ensembles import (
    Ensemble,
    SeedSpec,
    complex_gaussian,
    uniform_disk,
    sample_coefficients,
    moment_report,
    marginal_bound,
    marginal_density_probe,
    validate_ensemble,
)
from secgeom.zeros import (
    ZeroSet,
    RadialTestFunction,
    find_zeros,
    count_zeros_in,
    argument_principle_count,
    vanishing_order,
    pair_divisor,
    poincare_lelong_residual,
    log_norm_integral,
)
from secgeom.stats import (
    McEstimate,
    DecayFit,
    fit_decay,
    supnorm_experiment,
    variance_identity_check,
    equidistribution_experiment,
    hole_experiment,
    test_function_ld_experiment,
)

__version__ = "0.1.0"
