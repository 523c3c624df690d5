"""Spectral analysis of the discretized electric volume integral operator."""
from .assembly import DiscreteOperator, apply_matfree, assemble_dense, build_operator, self_term
from .bounds import BoundRegion, circle_region, general_bound_holds, spectral_radius_bound, wedge_region
from .eig import SpectrumResult, classify, eig_arnoldi, eig_dense
from .media import BackgroundMedium, Box, ContrastField, Grid, ScattererSpec, derive_background, rasterize
from .solver import RelaxationPlan, plan_relaxation, solve_relaxed
from .symbol import essential_spectrum, fourier_symbol_F, symbol_phi, symbol_phi_inverse

__version__ = "0.1.0"

__all__ = [
    "BackgroundMedium",
    "BoundRegion",
    "Box",
    "ContrastField",
    "DiscreteOperator",
    "Grid",
    "RelaxationPlan",
    "ScattererSpec",
    "SpectrumResult",
    "apply_matfree",
    "assemble_dense",
    "build_operator",
    "circle_region",
    "classify",
    "derive_background",
    "eig_arnoldi",
    "eig_dense",
    "essential_spectrum",
    "fourier_symbol_F",
    "general_bound_holds",
    "plan_relaxation",
    "rasterize",
    "self_term",
    "solve_relaxed",
    "spectral_radius_bound",
    "symbol_phi",
    "symbol_phi_inverse",
    "wedge_region",
]
