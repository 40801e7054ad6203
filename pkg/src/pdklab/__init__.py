"""pdklab: a desk-scale numerical laboratory for positive definite kernels.

Certify positive semidefiniteness of Gram matrices, evaluate the 3/4/5-point
inequality witnesses that drive regularity propagation, run finite-difference
and contour-integral differentiation, build derivative kernels, and lift
one-variable functions to kernels through involutive star maps.
"""

from .domains import Disc, Domain, DomainError, Interval, PointSet
from .findiff import (
    BETA0,
    BETA0_SHIFTED,
    BETA_LAMBDA_DERIVATIVE,
    DecayTrace,
    FdEstimate,
    ProbeRegion,
    StepSequence,
    beta_decay_suite,
    beta_decay_trace,
    delta,
    derivative_kernel,
    gamma_phi_identity,
    gamma_phi_identity_suite,
    mixed_partial_fd,
    phi,
    psi,
    psi_shifted,
    sn_probe,
)
from .grouplift import (
    IDENTITY,
    NEGATED_CONJUGATE,
    NEGATION,
    CodiffSets,
    LiftedKernel,
    StarMap,
    codiff_and_diagonal,
    continuity_propagation_report,
    lift,
    pd_function_check,
    regularity_propagation_suite,
)
from .holo import (
    ContourSpec,
    HoloFunctionHandle,
    contour_increment_ratio,
    double_contour_mixed,
    holo_propagation_suite,
    make_holo_function,
    sesqui_check,
    wirtinger_fd,
)
from .inequalities import (
    InequalityWitness,
    block_psd_inequality,
    five_point_witness,
    four_point_shifted_witness,
    four_point_witness,
    random_block_suite,
    random_witness_suite,
    three_point_defect,
)
from .kernels import (
    BUILTIN_NAMES,
    DerivativeValue,
    FieldError,
    GramMatrix,
    KernelHandle,
    KernelSpec,
    Smoothness,
    SpecError,
    builtin,
    eval_derivative,
    gram,
    lift_kernel,
    load_kernel,
    make_kernel,
)
from .psd import (
    PropertyReport,
    PsdCertificate,
    PsdSuiteReport,
    check_pointwise_properties,
    check_psd,
    random_psd_suite,
)

__version__ = "0.1.0"
