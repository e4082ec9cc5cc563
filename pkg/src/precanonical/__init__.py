"""Precanonical (De Donder-Weyl) field theory: brackets, classical checks, quantisation."""
from .clifford import Metric, Multivector, gamma_top, mv_exp, operator_pair
from .errors import PrecanonicalError
from .gradedforms import HorizontalForm, PhaseContext, graded_bracket
from .poly import Poly

__version__ = "0.1.0"
