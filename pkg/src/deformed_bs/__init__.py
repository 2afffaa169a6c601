"""Bohr-Sommerfeld spectra for deformed commutation relations [X, P] = i hbar f(X, P)."""

__version__ = "0.1.0"

from .deformation import (CustomDeformation, Deformation, MomentumOnly, PositionOnly,
                          QuadraticGUP, deformation_from_expr, min_momentum_uncertainty,
                          min_position_uncertainty, q_factor)
from .expr import Expression, evaluate, parse
from .problem import CustomPotential, Harmonic, Problem, SquareWell
from .quadrature import QuadratureResult, integrate_adaptive, turning_point_transform
from .quantizer import (AreaLimit, LevelResult, QuantizationTarget, area_limit,
                        contour_area_momentum_only, max_level, phase_area, solve_level,
                        spectrum)

__all__ = [
    "AreaLimit", "CustomDeformation", "CustomPotential", "Deformation", "Expression",
    "Harmonic", "LevelResult", "MomentumOnly", "PositionOnly", "Problem", "QuadraticGUP",
    "QuadratureResult", "QuantizationTarget", "SquareWell", "area_limit",
    "contour_area_momentum_only", "deformation_from_expr", "evaluate", "integrate_adaptive",
    "max_level", "min_momentum_uncertainty", "min_position_uncertainty", "parse",
    "phase_area", "q_factor", "solve_level", "spectrum", "turning_point_transform",
]
