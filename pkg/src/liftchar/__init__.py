"""Contractive liftings of row contractions, their characteristic functions and CP maps."""
from .exceptions import (
    ConvergenceError,
    DimensionMismatchError,
    FileFormatError,
    InvalidConfigurationError,
    LiftCharError,
    MalformedLiftingError,
    NotContractiveError,
    NotFixedError,
    NotReducedError,
)
from .fock import TruncatedFockIndex, creation_matrix, creation_matrices, enumerate_words, word_count
from .rowcon import (
    DefectData,
    MinimalDilation,
    RowContraction,
    defects,
    h1_exact,
    is_cnc,
    is_coisometric,
    is_star_stable,
    poisson_kernel,
    schaeffer_mid,
    validate_row_contraction,
    wold_data,
)
from .lifting import (
    GammaData,
    Lifting,
    b_star_from_gamma,
    exists_subisometric,
    gamma_from_lifting,
    is_coisometric_lifting,
    is_reduced,
    is_resolving,
    is_subisometric,
    isometries_equivalent,
    lifting_from_gamma,
    reduce_lifting,
    unobservable_subspace,
)
from .charfunc import (
    FunctionalModel,
    MultiAnalyticSymbol,
    char_symbol,
    compose_symbols,
    exact_domain_depth,
    functional_model,
    invariant_subspace,
    is_inner,
    lifting_from_symbol,
    popescu_char_fn,
    same_invariant_subspace,
    symbols_equivalent,
)
from .cpmaps import (
    CPMap,
    FixedPointSet,
    cp_apply,
    fixed_points,
    is_cp_lifting,
    is_ergodic,
    kappa,
    kappa_inverse,
    moment_matrix,
    subisometric_equivalences,
    support_compression,
)

__version__ = "0.1.0"
