"""DirectLiNGAM causal discovery with quantum (IQP) or Gaussian kernel NOCCO scores."""

__version__ = "0.1.0"

from .dataset import DataMatrix, MissingPolicy, SyntheticSpec, gen_synthetic, load_csv, standardize, subsample
from .independence import NoccoConfig, nocco
from .kernels import FeatureMapConfig, GramMatrix, KernelConfig, center_gram, feature_map, gram
from .lingam import CausalModel, DiscoveryConfig, discover, structure_equal
from .quantum import (
    CalibrationMatrix,
    IqpCircuitSpec,
    ReadoutNoiseModel,
    Statevector,
    build_calibration_matrix,
    kernel_exact,
    kernel_shots,
    mitigate,
)

__all__ = [
    "CalibrationMatrix",
    "CausalModel",
    "DataMatrix",
    "DiscoveryConfig",
    "FeatureMapConfig",
    "GramMatrix",
    "IqpCircuitSpec",
    "KernelConfig",
    "MissingPolicy",
    "NoccoConfig",
    "ReadoutNoiseModel",
    "Statevector",
    "SyntheticSpec",
    "build_calibration_matrix",
    "center_gram",
    "discover",
    "feature_map",
    "gen_synthetic",
    "gram",
    "kernel_exact",
    "kernel_shots",
    "load_csv",
    "mitigate",
    "nocco",
    "standardize",
    "structure_equal",
    "subsample",
]
