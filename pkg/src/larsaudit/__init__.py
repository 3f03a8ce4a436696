"""LARS path selection with Cp diagnostics, dimension checks and stress tests."""

__version__ = "0.1.0"

from .covsim import CovSimulation, simulate_cov
from .diagnostics import CaseCpRecord, FullModelInfo, case_cp, cp_total, full_model_info
from .dimension import SirResult, chi_sq_upper_tail, sir
from .errors import ConvergenceError, InputError, LarsAuditError, RankError
from .ingest import (
    Dataset,
    StandardizedView,
    TermExpansion,
    expand_terms,
    load_csv,
    load_diabetes,
    orthogonalize_expansion,
    standardize,
)
from .lars import LarsPath, LarsStep, SelectionResult, lars_path, select_by_cp, unstandardize
from .numerics import LeastSquaresFit, least_squares, projection_diagonals, symmetric_eig, whiten
from .stress import (
    StabilityReport,
    StressReport,
    marginal_shift_stress,
    round_augment,
    run_round_stress,
    scale_order_audit,
)
