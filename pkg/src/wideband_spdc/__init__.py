"""Simulation of broadband, beamlike type-1 downconversion in periodically poled crystals."""

__version__ = "0.1.0"

from .dispersion import (
    SellmeierModel,
    find_zero_gvd,
    load_model,
    refractive_index,
    wavenumber,
    wavenumber_derivative,
)
from .errors import (
    ConfigError,
    ConvergenceError,
    NoQPMSolutionError,
    RangeError,
    RootNotFoundError,
    ShapeError,
    SPDCError,
    WindowingError,
)
from .phasematch import (
    CrystalConfig,
    EmissionGeometry,
    PumpConfig,
    collinear_mismatch,
    degenerate_poling_period,
    poling_wavevector,
    taylor_mismatch_coefficients,
    transverse_mismatch,
)
