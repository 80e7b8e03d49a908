"""Data-driven reconstruction of quasiperiodically driven dynamics.

Given a single multichannel time series, the package identifies the
dominant rotational frequencies hidden in the signal, fits a periodic
forcing function on those frequencies, interpolates the leftover
nonlinear map with a normalized Gaussian kernel, and iterates the
resulting model to reproduce or forecast the signal.
"""

from .ingest import (
    TimeSeries,
    ChannelStats,
    EmbeddedSeries,
    load_csv,
    write_csv,
    standardize,
    unstandardize,
    delay_embed,
)
from .kernel import (
    KernelMatrix,
    NormalizedKernel,
    KernelBasis,
    gaussian_kernel_matrix,
    bistochastic_normalize,
    kernel_eigenbasis,
    median_squared_distance,
)
from .spectral import (
    ScoreMatrix,
    FrequencySet,
    frequency_scores,
    select_frequencies,
    suggest_thresholds,
)
from .harmonic import (
    HarmonicModel,
    ChaoticCoefficients,
    build_fourier_matrix,
    fit_periodic,
    chaotic_coefficients,
    eval_gper,
)
from .oos import (
    EvaluatorTable,
    OutOfSupportError,
    nystrom_phi,
    build_evaluator,
    eval_gchaos0,
)
from .dynamics import (
    DecompositionModel,
    ReconstructionRun,
    reconstruct,
    anma_error,
)
from .synth import SynthSpec, GroundTruth, generate, on_grid_rho
from .pipeline import analyze, AnalyzeParams, AnalyzeResult, StageError
from .model_io import save_model, load_model

__version__ = "0.1.0"

__all__ = [
    "TimeSeries",
    "ChannelStats",
    "EmbeddedSeries",
    "load_csv",
    "write_csv",
    "standardize",
    "unstandardize",
    "delay_embed",
    "KernelMatrix",
    "NormalizedKernel",
    "KernelBasis",
    "gaussian_kernel_matrix",
    "bistochastic_normalize",
    "kernel_eigenbasis",
    "median_squared_distance",
    "ScoreMatrix",
    "FrequencySet",
    "frequency_scores",
    "select_frequencies",
    "suggest_thresholds",
    "HarmonicModel",
    "ChaoticCoefficients",
    "build_fourier_matrix",
    "fit_periodic",
    "chaotic_coefficients",
    "eval_gper",
    "EvaluatorTable",
    "OutOfSupportError",
    "nystrom_phi",
    "build_evaluator",
    "eval_gchaos0",
    "DecompositionModel",
    "ReconstructionRun",
    "reconstruct",
    "anma_error",
    "SynthSpec",
    "GroundTruth",
    "generate",
    "on_grid_rho",
    "analyze",
    "AnalyzeParams",
    "AnalyzeResult",
    "StageError",
    "save_model",
    "load_model",
]
