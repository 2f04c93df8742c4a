"""Dynamic optimal transport on staggered grids with Neumann and periodic axes."""

from .color import (
    HsvImage,
    cyclic_hist_transport,
    exact_histogram_specification,
    hsv_to_rgb,
    hue_histogram,
    hue_transfer_pipeline,
    normalize_masses,
    rgb_to_hsv,
    rgb_transport,
)
from .errors import (
    BadMagic,
    DimensionMismatch,
    DynotError,
    EmptyHue,
    InvalidParams,
    IoError,
    MassMismatch,
    NonConvergence,
    ShapeMismatch,
    SizeMismatch,
    UnsupportedFormat,
    ZeroMass,
)
from .grid import BC, AxisSpec, GridSpec
from .prox import cost_J, prox_J, prox_J_field
from .solver import (
    Diagnostics,
    SolveResult,
    SolverParams,
    TransportProblem,
    cdf_transport_oracle_1d,
    evaluate_solution,
    pdhg_solve,
    project_Cd,
)
from .spectral import SpectralPlan, apply_AAt_pinv, build_poisson_plan

__version__ = "0.1.0"

__all__ = [
    "HsvImage",
    "cyclic_hist_transport",
    "exact_histogram_specification",
    "hsv_to_rgb",
    "hue_histogram",
    "hue_transfer_pipeline",
    "normalize_masses",
    "rgb_to_hsv",
    "rgb_transport",
    "BadMagic",
    "DimensionMismatch",
    "DynotError",
    "EmptyHue",
    "InvalidParams",
    "IoError",
    "MassMismatch",
    "NonConvergence",
    "ShapeMismatch",
    "SizeMismatch",
    "UnsupportedFormat",
    "ZeroMass",
    "BC",
    "AxisSpec",
    "GridSpec",
    "cost_J",
    "prox_J",
    "prox_J_field",
    "Diagnostics",
    "SolveResult",
    "SolverParams",
    "TransportProblem",
    "cdf_transport_oracle_1d",
    "evaluate_solution",
    "pdhg_solve",
    "project_Cd",
    "SpectralPlan",
    "apply_AAt_pinv",
    "build_poisson_plan",
]
