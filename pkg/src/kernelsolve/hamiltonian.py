"""Potentials, the operator H = -d^2/dx^2 + V(x) and its basis matrix elements."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .basis import BasisFamily
from .numerics import (
    STANDARD_FREQUENCY,
    ComplexField,
    FrequencyGrid,
    QuadratureRule,
    SpatialGrid,
    forward_ft,
    inverse_ft,
    pairwise_sum,
)

POTENTIAL_KINDS = ("zero", "harmonic", "finite-well", "tabulated")


class QuadratureIncompatibleError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Potential:
    kind: str = "zero"
    depth: float = 0.0
    half_width: float = 1.0
    samples: np.ndarray | None = None
    grid: SpatialGrid | None = None

    def __post_init__(self):
        if self.kind not in POTENTIAL_KINDS:
            raise ValueError(f"unknown potential kind {self.kind!r}")
        if self.kind == "finite-well":
            if not self.half_width > 0:
                raise ValueError("finite-well half_width must be > 0")
            if not self.depth < 0:
                raise ValueError("finite-well depth must be < 0")
        if self.kind == "tabulated":
            if self.samples is None or self.grid is None:
                raise ValueError("tabulated potential needs samples and a grid")
            s = np.asarray(self.samples, dtype=float)
            if s.shape != (self.grid.n,) or not np.all(np.isfinite(s)):
                raise ValueError("tabulated samples must be finite and match the grid")
            object.__setattr__(self, "samples", s)

    @classmethod
    def zero(cls):
        return cls("zero")

    @classmethod
    def harmonic(cls):
        return cls("harmonic")

    @classmethod
    def finite_well(cls, depth, half_width):
        return cls("finite-well", depth=depth, half_width=half_width)

    @property
    def smooth(self) -> bool:
        return self.kind in ("zero", "harmonic")

    @property
    def breakpoints(self) -> tuple:
        if self.kind == "finite-well":
            return (-self.half_width, self.half_width)
        return ()

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind == "zero":
            return np.zeros_like(x)
        if self.kind == "harmonic":
            return x * x
        if self.kind == "finite-well":
            return np.where(np.abs(x) <= self.half_width, self.depth, 0.0)
        if x.shape == self.grid.points.shape and np.array_equal(x, self.grid.points):
            return self.samples.copy()
        raise ValueError("tabulated potential is only defined on its own grid")

    def on_panels(self, x, panel) -> np.ndarray:
        """Values on composite-rule nodes, one-sided at panel boundaries."""
        if self.kind != "finite-well":
            return self(x)
        # panels are (-inf,-b], [-b,b], [b,inf); the middle one is inside the well
        return np.where(panel == 1, self.depth, 0.0)

    def describe(self) -> dict:
        d = {"kind": self.kind}
        if self.kind == "finite-well":
            d.update(depth=self.depth, half_width=self.half_width)
        return d


def second_derivative(f: ComplexField, fg: FrequencyGrid = STANDARD_FREQUENCY) -> ComplexField:
    """Spectral f'': transform, multiply by -gamma^2, transform back."""
    F = forward_ft(f, fg)
    return inverse_ft(ComplexField(-fg.points**2 * F.samples, fg), f.grid)


def apply_h(f: ComplexField, V: Potential, fg: FrequencyGrid = STANDARD_FREQUENCY) -> ComplexField:
    x = f.grid.points
    out = -second_derivative(f, fg).samples + V(x) * f.samples
    if not np.all(np.isfinite(out)):
        raise ValueError("H f is not finite; potential and field do not match")
    return ComplexField(out, f.grid)


@dataclass(eq=False)
class HamiltonianMatrix:
    entries: np.ndarray
    family: BasisFamily
    potential: Potential
    quadrature: QuadratureRule
    by_parts_discrepancy: float = 0.0
    meta: dict = field(default_factory=dict)

    @property
    def N(self) -> int:
        return self.entries.shape[0]

    def asymmetry(self) -> float:
        return float(np.max(np.abs(self.entries - self.entries.T)))


def _check_compat(V: Potential, quad: QuadratureRule):
    if quad.kind == "gauss-hermite" and not V.smooth:
        raise QuadratureIncompatibleError(
            f"gauss-hermite quadrature requires a smooth potential, got {V.kind}")
    if V.kind == "tabulated" and quad.grid != V.grid:
        raise QuadratureIncompatibleError("tabulated potential needs trapezoid on its own grid")


def _gram_like(A, B, w):
    """M[k, l] = sum_i w_i A[k, i] conj(B[l, i]) with pairwise reduction."""
    return pairwise_sum(A[:, None, :] * np.conj(B)[None, :, :] * w)


def potential_matrix(family: BasisFamily, V: Potential, quad: QuadratureRule) -> np.ndarray:
    """P[k, l] = int V e_k conj(e_l) dx; panels split at any potential jumps."""
    _check_compat(V, quad)
    x, w, panel = quad.nodes_weights(V.breakpoints)
    E = family.table(x, 0)
    return _gram_like(V.on_panels(x, panel) * E, E, w)


def second_derivative_matrix(family: BasisFamily, quad: QuadratureRule) -> np.ndarray:
    """D[k, l] = int e_k'' conj(e_l) dx."""
    x, w, _ = quad.nodes_weights()
    return _gram_like(family.table(x, 2), family.table(x, 0), w)


def matrix_elements(family: BasisFamily, V: Potential,
                    quad: QuadratureRule | None = None) -> HamiltonianMatrix:
    """R[k, l] = <H e_k | e_l> = -int e_k'' e_l + int V e_k e_l.

    The by-parts form int e_k' e_l' + int V e_k e_l is evaluated alongside and
    the largest entrywise difference kept on the result.
    """
    quad = quad or QuadratureRule()
    pot = potential_matrix(family, V, quad)
    # kinetic integrands are smooth; only the potential term needs split panels
    x, w, _ = quad.nodes_weights()
    E = family.table(x, 0)
    E1 = family.table(x, 1)
    E2 = family.table(x, 2)
    R = -_gram_like(E2, E, w) + pot
    R_parts = _gram_like(E1, E1, w) + pot
    if not np.all(np.isfinite(R)):
        raise ValueError("non-finite Hamiltonian matrix")
    return HamiltonianMatrix(R, family, V, quad, float(np.max(np.abs(R - R_parts))))


def generator_matrix(family: BasisFamily, V: Potential, alpha: complex, beta: complex,
                     quad: QuadratureRule | None = None) -> HamiltonianMatrix:
    """Matrix <A e_k | e_l> of A = alpha d^2/dx^2 + beta V.

    ``alpha=-1, beta=1`` gives back ``matrix_elements`` exactly.
    """
    quad = quad or QuadratureRule()
    if alpha == -1 and beta == 1:
        return matrix_elements(family, V, quad)
    base = matrix_elements(family, V, quad)
    A = alpha * second_derivative_matrix(family, quad) + beta * potential_matrix(family, V, quad)
    return HamiltonianMatrix(np.asarray(A, dtype=complex), family, V, quad,
                             base.by_parts_discrepancy,
                             meta={"alpha": complex(alpha), "beta": complex(beta)})
