"""Finite-dimensional spectral localizers with certified index pairings."""

from .errors import (
    AdmissibilityError,
    ClassInconsistencyError,
    ConfigError,
    ContractionViolationError,
    DomainError,
    GaplessError,
    GenerationError,
    InternalConsistencyError,
    LocalizerLabError,
    NegativityError,
    NotInvertibleError,
    ParityError,
    PreconditionError,
    ResolutionError,
    SpectralCutError,
    TruncationTooSmallError,
)
from .grading import (
    GradedOperator,
    GradedSpace,
    SpectralDecomposition,
    bounded_transform,
    func_calc,
    gap,
    lipschitz_derivative,
    operator_norm,
    sqrt_positive,
)
from .localizing import (
    LocalizingFunction,
    default_localizer,
    fourier_weight,
    validate_localizing,
)
from .localizer import (
    LocalizerBundle,
    LocalizerParams,
    assemble_localizer,
    certificate_residual,
    choose_params,
    constant_C,
    lower_bound_residual,
    make_params,
    sharp_localizer,
    square_identity_residual,
    support_residual,
)
from .ktheory import (
    HomotopyReport,
    Inertia,
    LocalizerIndexReport,
    RelativeClass,
    class_of,
    common_params,
    dirac_path,
    dirac_path_stability,
    direct_sum,
    half_signature_class,
    homotopy_stability,
    index_class_projection,
    inertia_ldl,
    localizer_index,
    phase_path,
    positive_projection,
    signature,
    space_sum,
)
from .oracles import (
    IndexResult,
    chern_number_bz,
    compressed_index,
    graded_kernel_index,
    window_signature_index,
)
from .models import (
    ModelDescriptor,
    RandomLipschitz,
    mk_block_example,
    oscillator_dirac,
    parse_model,
    qwz_bloch,
    qwz_chern_model,
    random_lipschitz,
)
from .matrixio import read_operator, write_operator
from .config import RunConfig, build_config, load_config_file
from .verification import (
    CheckResult,
    parallel_map,
    run_suite,
    suite_bounds,
    suite_homotopy,
    suite_identities,
    thread_count,
)

__version__ = "0.1.0"
