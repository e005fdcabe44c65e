"""Embeddability of 4x4 Markov matrices via real logarithm branches.

The package decides whether a row-stochastic 4x4 matrix with simple
spectrum {1, lam, mu, conj(mu)} is the exponential of a rate matrix, finds
the complete set of logarithm branches that are rate matrices, and builds
certified families of embeddable matrices whose principal logarithm is not
a rate matrix.
"""

from .branches import (
    BranchLog,
    EmbeddabilityReport,
    MarkovMatrix,
    RateMatrix,
    affine_branch_family,
    branch_log,
    classify,
    validate_markov,
    validate_rate,
)
from .errors import (
    DegenerateStep,
    DeltaOutOfBound,
    EmbedLogError,
    ImaginaryResidue,
    KZero,
    LOutOfRange,
    NearDegenerateY,
    NegativeEntry,
    NegativeOffDiagonal,
    NotAWitness,
    NotInFamily,
    NotMarkov,
    NotRescalable,
    OffVariety,
    RowSumViolation,
    SingularMatrix,
    SpectrumOutOfClass,
)
from .families import (
    FamilyInstance,
    OpenSetWitness,
    PerturbationDelta,
    WitnessMargins,
    build_example,
    build_perturbed,
    certify_witness,
    closed_form_log,
    perturb_markov,
    recover_delta,
    sample_delta,
    swap_states,
    validated_kappa,
)
from .linalg import (
    Spectrum,
    eigendecompose_markov,
    expm,
    mat_inverse,
    mat_mul,
    oracle_expm,
    taylor_tail_bound,
)
from .ssm import (
    ConeVerdict,
    GeneratorParams,
    SSPattern,
    build_q,
    cone_check,
    is_ss,
    q_spectrum,
    ray_generators,
    sample_interior,
    variety_residual,
)
from .tolerances import DEFAULT_TOL, Tolerances

__version__ = "1.0.0"
