"""Basis-expansion kernel construction for multiplier solutions of 1-D evolution equations,
with classical reference solvers and a claim-verification harness."""

__version__ = "0.1.0"

from .basis import BasisFamily, condition_check, element_ft, eval_element
from .hamiltonian import Potential, apply_h, generator_matrix, matrix_elements
from .kernel import (
    KernelSetup,
    apply_S,
    apply_T,
    h_symbol,
    kernel_coeffs,
    propagation_symbol,
    ratio_inner_product,
)
from .numerics import (
    STANDARD_FREQUENCY,
    STANDARD_SPATIAL,
    ComplexField,
    FrequencyGrid,
    QuadratureRule,
    SpatialGrid,
    forward_ft,
    inner_product,
    inverse_ft,
)
from .propagator import PropagationRequest, evolve, schrodinger_general_solution
from .reference import EvolutionParams, analytic_oracle, crank_nicolson, split_step

__all__ = [
    "BasisFamily", "ComplexField", "EvolutionParams", "FrequencyGrid", "KernelSetup",
    "Potential", "PropagationRequest", "QuadratureRule", "STANDARD_FREQUENCY",
    "STANDARD_SPATIAL", "SpatialGrid", "analytic_oracle", "apply_S", "apply_T", "apply_h",
    "condition_check", "crank_nicolson", "element_ft", "eval_element", "evolve",
    "forward_ft", "generator_matrix", "h_symbol", "inner_product", "inverse_ft",
    "kernel_coeffs", "matrix_elements", "propagation_symbol", "ratio_inner_product",
    "schrodinger_general_solution", "split_step",
]
