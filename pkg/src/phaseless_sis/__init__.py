"""Reconstruction of causal signals in shift-invariant spaces from phaseless samples."""

from .generators import (Chirp, ChirpRealPart, CubicBSpline, FunctionSystem, Generator, GhcReport,
                         Modulated, Tabulated, build_system, check_ghc, from_spec)
from .harness import TrialConfig, TrialReport, cdf, error_complex, error_real, run_trials, snr_sweep
from .pdcr import (AmbiguousRootError, DegenerateSampleError, QuadraticData, ReconOptions,
                   ReconstructionResult, reconstruct_complex, reconstruct_local, reconstruct_real)
from .sampling import MagnitudeSamples, SampleDesign, SamplePlan, add_noise, draw_design, draw_points, measure
from .signals import CausalSignal, ambiguous_pair, aux_v, evaluate, index_set, max_gap

__all__ = [
    "AmbiguousRootError", "CausalSignal", "Chirp", "ChirpRealPart", "CubicBSpline",
    "DegenerateSampleError", "FunctionSystem", "Generator", "GhcReport", "MagnitudeSamples",
    "Modulated", "QuadraticData", "ReconOptions", "ReconstructionResult", "SampleDesign",
    "SamplePlan", "Tabulated", "TrialConfig", "TrialReport", "add_noise", "ambiguous_pair",
    "aux_v", "build_system", "cdf", "check_ghc", "draw_design", "draw_points", "error_complex",
    "error_real", "evaluate", "from_spec", "index_set", "max_gap", "measure", "reconstruct_complex",
    "reconstruct_local", "reconstruct_real", "run_trials", "snr_sweep",
]
