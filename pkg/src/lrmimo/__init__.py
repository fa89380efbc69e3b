"""Lattice-reduction-aided MIMO detection with BKZ proximity-factor bounds."""

from .bounds import (
    HermiteValue,
    ProximityBound,
    check_schnorr,
    hermite_constant,
    proximity_bound_sic,
    schnorr_lower,
    schnorr_upper,
)
from .detectors import (
    DetectionResult,
    detect_lra_sic,
    detect_ml_exhaustive,
    detect_ml_sphere,
    detect_mmse,
    detect_sic,
    detect_zf,
)
from .lattice import Basis, GsoDecomposition, compute_gso, project_block, read_basis, size_reduce, write_basis
from .mimo import (
    ComplexChannel,
    Constellation,
    RealEmbedding,
    add_awgn,
    constellation_to_lattice,
    embed_real,
    lattice_to_constellation,
    sample_channel,
    snr_to_sigma,
)
from .reduction import (
    ReductionParams,
    SvpResult,
    bkz_reduce,
    kz_reduce,
    lll_reduce,
    successive_minima,
    svp_enumerate,
)

__version__ = "0.1.0"
