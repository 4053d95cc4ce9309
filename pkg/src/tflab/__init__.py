"""Discrete time-frequency analysis on a periodic grid.

STFT and tau-Wigner distributions, localization operators and
tau-quantizations, Gabor frames, weighted mixed norms and the spectral tools
used to study them.
"""

from ._validation import PreconditionError, StructuralError, TFLabError
from .gabor import (
    FrameError,
    GaborSystem,
    Lattice,
    analysis,
    dual_window,
    frame_bounds,
    mod_norm,
    seq_norm,
    synthesis,
)
from .grid import GridSpec, PhaseSpaceField, SampledSignal, gaussian, inner, make_grid, norm
from .ops import (
    OperatorMatrix,
    Symbol,
    gaussian_symbol,
    localization_matrix,
    schur_bound,
    tau_quantization_matrix,
)
from .spectral import decay_fit, hermitian_eig, jacobi_eigh, jacobi_svd, singular_values
from .tfr import stft, tau_wigner
from .weights import parse_weight

__version__ = "0.1.0"

__all__ = [
    "FrameError", "GaborSystem", "GridSpec", "Lattice", "OperatorMatrix", "PhaseSpaceField",
    "PreconditionError", "SampledSignal", "StructuralError", "Symbol", "TFLabError",
    "analysis", "decay_fit", "dual_window", "frame_bounds", "gaussian", "gaussian_symbol",
    "hermitian_eig", "inner", "jacobi_eigh", "jacobi_svd", "localization_matrix", "make_grid",
    "mod_norm", "norm", "parse_weight", "schur_bound", "seq_norm", "singular_values", "stft",
    "synthesis", "tau_quantization_matrix", "tau_wigner",
]
