"""Correlators, limit shapes, and universal edge kernels of a free-fermion
chain with nearest and next-nearest neighbor hopping in imaginary time."""

__version__ = "0.1.0"

from .numerics import PrecisionContext, QuadratureRule, KernelGrid  # noqa: F401
from .special import DeformedBesselParams, HigherAiryOrder  # noqa: F401
from .opuc import WeightSpec, VerblunskySequence  # noqa: F401
from .lattice import ModelParams, CorrelationMatrix, EdgeScaling  # noqa: F401
from .hydro import HydroParams, DensityProfile  # noqa: F401
from .limitkernels import AiryFamily, TacnodeParams  # noqa: F401
