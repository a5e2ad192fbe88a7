"""Simulator and analysis toolkit for the generation and verification of a
three-photon, three-dimensional OAM GHZ state from two entangled-pair
sources and a high-dimensional multi-port."""

from .states import (
    ELL_MAX,
    FockTerm,
    LinearMap,
    ModeLabel,
    NotNormalized,
    PathCollision,
    PhotonicState,
    UnsupportedMode,
    apply,
    compose,
    extend_identity,
    fidelity_pure,
    postselect,
    tensor,
)
from .experiment import (
    PipelineConfig,
    PipelineResult,
    SourceAmplitudes,
    classify_terms,
    hom_scan,
    run_pipeline,
    spdc_state,
)

__version__ = "0.1.0"

__all__ = [
    "ELL_MAX",
    "FockTerm",
    "LinearMap",
    "ModeLabel",
    "NotNormalized",
    "PathCollision",
    "PhotonicState",
    "UnsupportedMode",
    "apply",
    "compose",
    "extend_identity",
    "fidelity_pure",
    "postselect",
    "tensor",
    "PipelineConfig",
    "PipelineResult",
    "SourceAmplitudes",
    "classify_terms",
    "hom_scan",
    "run_pipeline",
    "spdc_state",
    "__version__",
]
