"""Exact and Gaussian integrated positional encodings of pixel frusta."""

__version__ = "0.1.0"

from .baseline_encoding import (
    GaussianRegion,
    cone_moments,
    contract_gaussian,
    contraction_jacobian,
    frequency_lift,
    gaussian_ipe,
    pe,
    square_pyramid_eipe,
)
from .encoding import EncodingVector
from .errors import (
    ConsistencyError,
    DomainError,
    ExactIPEError,
    FormatError,
    InvalidCovarianceError,
    InvalidInputError,
    OrientationError,
    UnsupportedRegionError,
)
from .exact_encoding import Degeneracy, eipe, eipe_batch, eipe_frustum, sigma_coeff, underflow_guard, xi_coeff
from .geometry import (
    CameraPose,
    Frustum,
    PixelSpec,
    TriangleFace,
    box_frustum,
    contract_frustum,
    contract_point,
    frustum_from_pixel,
    triangulate,
    volume,
)
from .oracle import OracleEstimate, TetDecomposition, decompose, mc_encoding, mc_moments, sample_uniform
from .render_quadrature import IntervalRadiance, RaySamples, composite, composite_weights, stratified_ts

__all__ = [
    "__version__",
    "CameraPose", "PixelSpec", "Frustum", "TriangleFace",
    "frustum_from_pixel", "box_frustum", "triangulate", "volume", "contract_point", "contract_frustum",
    "EncodingVector", "Degeneracy", "sigma_coeff", "xi_coeff", "underflow_guard",
    "eipe", "eipe_batch", "eipe_frustum",
    "GaussianRegion", "frequency_lift", "pe", "gaussian_ipe", "cone_moments",
    "contraction_jacobian", "contract_gaussian", "square_pyramid_eipe",
    "TetDecomposition", "OracleEstimate", "decompose", "sample_uniform", "mc_encoding", "mc_moments",
    "RaySamples", "IntervalRadiance", "stratified_ts", "composite_weights", "composite",
    "ExactIPEError", "InvalidInputError", "InvalidCovarianceError", "DomainError",
    "OrientationError", "UnsupportedRegionError", "ConsistencyError", "FormatError",
]
