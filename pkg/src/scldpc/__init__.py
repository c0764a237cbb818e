"""High-rate spatially coupled LDPC codes built from self-orthogonal
convolutional protographs: construction, lifting, encoding, decoding, and
threshold analysis."""

from .csoc import (
    CsocSpec,
    CsocStub,
    GeneratorPolynomial,
    OrthogonalityReport,
    StructuralError,
    catalog,
    catalog_lookup,
    catalog_stubs,
    search_csoc,
    validate_self_orthogonality,
)
from .matrices import (
    BandMatrix,
    TerminationInfo,
    build_band,
    build_nonsystematic_H,
    build_systematic_H,
    column_templates,
    read_alist,
    read_coord_csv,
    terminate,
    termination_rate,
    write_alist,
    write_coord_csv,
)
from .lifting import (
    SCHEMES,
    EdgeSpreadProto,
    LiftedCode,
    classical_edge_spread,
    expand,
    lift,
    search_girth6_lifting,
)
from .graphs import DistanceResult, GirthResult, girth, min_distance_bounded
from .codec import (
    FORMS,
    Code,
    DecoderContext,
    SwdConfig,
    bp_decode_window,
    majority_logic_decode,
    make_code,
    sliding_window_decode,
)
from .channel import (
    CSV_FIELDS,
    SimConfig,
    SimResult,
    noise_sigma,
    run_sim,
    uncoded_ber,
    write_csv,
)
from .pexit import (
    THRESHOLD_FIELDS,
    PexitProblem,
    ThresholdResult,
    binary_awgn_capacity,
    binary_awgn_capacity_inverse,
    pexit_converges,
    pexit_threshold,
    write_threshold_csv,
)
from .kernels import BACKEND

__version__ = "0.1.0"
