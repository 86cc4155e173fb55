"""Analytic torsion of bounded cones over model even-dimensional cross-sections."""

__version__ = "0.1.0"

from .crosssection import (  # noqa: E402,F401
    CrossSection,
    EigenLevel,
    SpectralSlice,
    betti_numbers,
    brute_force_form_laplacian,
    build_cross_section,
    coclosed_spectrum,
    theta_heat_coeffs,
)
from .errors import (  # noqa: E402,F401
    ConfigError,
    CutoffInsufficientError,
    DomainError,
    ExperimentalUnsupportedError,
    ZetaPoleError,
)

__all__ = [
    "CrossSection",
    "EigenLevel",
    "SpectralSlice",
    "betti_numbers",
    "brute_force_form_laplacian",
    "build_cross_section",
    "coclosed_spectrum",
    "theta_heat_coeffs",
    "ConfigError",
    "CutoffInsufficientError",
    "DomainError",
    "ExperimentalUnsupportedError",
    "ZetaPoleError",
    "__version__",
]
