"""Exact-arithmetic toolkit for separability probabilities of random
induced two-qubit states: determinantal moment formulas, orthogonal-
polynomial tail inversion, closed-form probability evaluation and
rational reconstruction."""

from .closedform import (
    G,
    StructuralPrediction,
    StructureCheck,
    StructureReport,
    extract_p,
    extract_p_from_values,
    log_ratio,
    sep_prob,
    structural_prediction,
    structure_checks,
    verify_structure,
)
from .errors import (
    CacheError,
    CacheHeaderError,
    CacheIntegrityError,
    CacheLockedError,
    DomainError,
    NoCandidateError,
    PrecisionError,
    SepprobError,
    SingularityError,
    StructureViolation,
    UncancelledPole,
)
from .exactnum import (
    BigRational,
    FactorList,
    SqrtPiScaled,
    as_rational,
    factored_ratio,
    gamma_half,
    is_half_integer,
    pochhammer,
)
from .inversion import (
    GegenbauerTables,
    TailEstimate,
    build_tables,
    convergence_profile,
    gegenbauer_tail,
    legendre_tail,
)
from .moments import (
    DIFF_INTERVAL,
    PT_INTERVAL,
    MomentSequence,
    Scenario,
    Variable,
    diff_moment,
    moment_sequence,
    pt_moment,
    seed_sequence,
)
from .recon import (
    Confidence,
    RationalGuess,
    reconstruct,
    reconstruct_sequence,
)

__version__ = "0.1.0"
