"""corrand: desk-scale lab for column-correlated random lattice operators."""

__version__ = "0.1.0"

from .boole import PointMeasure, borel_transform, finite_volume_support, level_set_measure, tail_measure
from .disorder import DisorderSample, DisorderSpec, Hamiltonian, assemble, realize, sample
from .dynamics import MomentCurve, SymFiberModel, evolve, growth_exponent, moments_energy, moments_time
from .floquet import FiberOperator, SpectralDensity, critical_gamma, sigma_scan, spectral_density
from .greens import HalflineGreens, NumericsError, greens_entry, halfline_cf, sym_corner_formula
from .lattice import GraphSpec, Kind, LatticeOperator, build, build_diag, build_sym

__all__ = [
    "DisorderSample",
    "DisorderSpec",
    "FiberOperator",
    "GraphSpec",
    "HalflineGreens",
    "Hamiltonian",
    "Kind",
    "LatticeOperator",
    "MomentCurve",
    "NumericsError",
    "PointMeasure",
    "SpectralDensity",
    "SymFiberModel",
    "assemble",
    "borel_transform",
    "build",
    "build_diag",
    "build_sym",
    "critical_gamma",
    "evolve",
    "finite_volume_support",
    "greens_entry",
    "growth_exponent",
    "halfline_cf",
    "level_set_measure",
    "moments_energy",
    "moments_time",
    "realize",
    "sample",
    "sigma_scan",
    "spectral_density",
    "sym_corner_formula",
    "tail_measure",
]
