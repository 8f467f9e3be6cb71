"""Certified evaluation of modified Bessel kernels, total positivity
certificates, Grassmannian positivity, and the discrete heat flow that
connects them.

Everything numeric flows through CertifiedReal, a midpoint-radius ball;
every verdict is backed by directed-rounding sign certificates, with
automatic precision escalation up to a configurable cap.
"""

from .scalar import (
    DEFAULT_PRECISION,
    DEFAULT_PRECISION_CAP,
    CertificationError,
    CertifiedReal,
    DomainError,
    PrecisionCapWarning,
    Sign,
    add,
    ball_from_endpoints,
    certified_sign,
    const_pi,
    cos,
    current_precision,
    div,
    escalate_precision,
    exp,
    from_exact,
    log,
    mul,
    one,
    pow_int,
    pow_real,
    precision,
    sin,
    sqrt,
    sub,
    zero,
)
from .bessel import (
    bessel_derivative,
    bessel_i,
    bessel_i_quadrature,
    generating_partial_sum,
    tail_bound,
)
from .kernels import (
    KernelMatrix,
    build_bessel_matrix,
    build_karlin_matrix,
    build_toeplitz_bessel,
    build_vandermonde,
    karlin_kappa,
    matrix_to_json_str,
)
from .positivity import (
    GrassmannReport,
    GrassmannVerdict,
    MinorSelector,
    PlueckerVector,
    TPCertificate,
    TPVerdict,
    check_grassmann_point,
    check_tp,
    det_certified,
    enumerate_minors,
    h_k_map,
    pluecker,
    pluecker_nonproportional,
    sign_changes,
)
from .heatflow import (
    FlowState,
    FlowTrajectory,
    IndexWindow,
    L2BoundReport,
    ResidualReport,
    discrete_laplacian,
    f_direct,
    flow_integrate,
    flow_matrix,
    flow_rhs,
    index_window,
    l2_bound,
    residual_check,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_PRECISION", "DEFAULT_PRECISION_CAP",
    "CertificationError", "CertifiedReal", "DomainError",
    "PrecisionCapWarning", "Sign",
    "add", "sub", "mul", "div", "exp", "log", "sqrt", "cos", "sin",
    "pow_int", "pow_real", "const_pi", "one", "zero",
    "ball_from_endpoints", "certified_sign", "current_precision",
    "escalate_precision", "from_exact", "precision",
    "bessel_i", "bessel_i_quadrature", "bessel_derivative",
    "tail_bound", "generating_partial_sum",
    "KernelMatrix", "build_bessel_matrix", "build_toeplitz_bessel",
    "build_karlin_matrix", "build_vandermonde", "karlin_kappa",
    "matrix_to_json_str",
    "TPVerdict", "TPCertificate", "MinorSelector", "PlueckerVector",
    "GrassmannVerdict", "GrassmannReport",
    "det_certified", "enumerate_minors", "check_tp", "pluecker",
    "check_grassmann_point", "h_k_map", "pluecker_nonproportional",
    "sign_changes",
    "IndexWindow", "FlowState", "FlowTrajectory", "ResidualReport",
    "L2BoundReport", "index_window", "discrete_laplacian", "flow_matrix",
    "flow_rhs", "f_direct", "residual_check", "flow_integrate", "l2_bound",
]
