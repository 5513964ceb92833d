"""Spectrum and eigenfunctions of the linear-dispersion, linear-potential oscillator ``H = v|p| + F|x|``."""

__version__ = "0.1.0"

from .eigensolver import (  # noqa: E402
    BilinearOscillator,
    ConvergenceError,
    SolveRequest,
    Spectrum,
    postprocess,
    solve,
    solve_dense,
    solve_iterative,
    to_physical,
)
from .fitting import EigenfunctionModel, ansatz_ground_state, eval_model, fit, scan_ansatz  # noqa: E402
from .lattice import (  # noqa: E402
    HamiltonianOperator,
    LatticeConfig,
    PhysicalScale,
    apply,
    build_operator,
    fourier_coeff,
    quadrature,
    semi_discrete_ft,
    to_dense,
)
from .quasiclassical import QcSpectrum, compare, lambda_qc  # noqa: E402
from .verification import (  # noqa: E402
    Thresholds,
    VerificationReport,
    check_fourier_duality,
    check_integral_relation,
    check_tail,
    hilbert_residual,
    verify,
)

__all__ = [
    "BilinearOscillator",
    "ConvergenceError",
    "EigenfunctionModel",
    "HamiltonianOperator",
    "LatticeConfig",
    "PhysicalScale",
    "QcSpectrum",
    "SolveRequest",
    "Spectrum",
    "Thresholds",
    "VerificationReport",
    "ansatz_ground_state",
    "apply",
    "build_operator",
    "check_fourier_duality",
    "check_integral_relation",
    "check_tail",
    "compare",
    "eval_model",
    "fit",
    "fourier_coeff",
    "hilbert_residual",
    "lambda_qc",
    "postprocess",
    "quadrature",
    "scan_ansatz",
    "semi_discrete_ft",
    "solve",
    "solve_dense",
    "solve_iterative",
    "to_dense",
    "to_physical",
    "verify",
]
