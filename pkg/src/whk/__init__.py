"""whk - witness-hierarchy kit for bipartite quantum operators.

Classify Hermitian operators into the strata separable state / entangled
state / entanglement witness / other observable, construct the detector at
each level of the hierarchy, order entangled states by witnessing power,
and decompose states into a separable part plus irreducible remainder.
"""

from .core import (
    DEFAULT_TOL,
    Dims,
    HermitianOperator,
    ProductVector,
    Spectrum,
    identity,
    pairing,
    partial_transpose,
    pseudo_inverse,
    random_hermitian,
    range_projector,
    spectrum,
)
from .errors import (
    DimensionMismatchError,
    GenerationFailureError,
    InconsistencyError,
    IndistinguishableError,
    InvalidArgumentError,
    MalformedOperatorError,
    NoSeparatorFoundError,
    NotInOtherObservablesError,
    NotPositiveError,
    NoWitnessError,
    PreconditionError,
    SchemaError,
    SearchInconclusiveError,
    StratumViolationError,
    WhkError,
)
from .families import (
    MeasureResult,
    UPBSpec,
    bell_phi_plus,
    ces_max_dim,
    ces_mixture_optimal_sample,
    measure,
    singlet_vector,
    tiles_upb,
    upb_complement_state,
    werner,
    werner_witness_family,
    werner_witness_operator,
)
from .hierarchy import (
    ClassLabel,
    CommonDetection,
    CommonWitness,
    classify,
    common_detected_state,
    common_witness,
    distinguish,
    separate,
    super_super_witness_for,
    super_witness_for,
    witness_for,
)
from .order import (
    BSAResult,
    DeltaResult,
    FinerVerdict,
    OptimalityVerdict,
    delta,
    in_witnessed_set,
    is_edge,
    is_finer,
    is_optimal,
    optimize,
)
from .seesaw import BlockPositivityReport, min_product_expectation, product_minima
from .separators import SeparatorResult, entangling_witness_search
from .states import (
    DecompositionCertificate,
    Detection,
    ProductDecomposition,
    QuantumState,
    Witness,
    as_state,
    decompose_witness,
    detects,
    indecomposability_certificate,
    is_block_positive,
    is_ppt,
    is_separable,
    product_decomposition_search,
    pure_state,
    random_decomposable_witness,
)

__version__ = "0.1.0"
