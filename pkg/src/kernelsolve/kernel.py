"""Kernel coefficients, h-symbols, the propagation symbol K(gamma) and the operators S, T.

All sums over basis indices are truncated to 0..N-1.  Ratios
e_s^(gamma)/e_m^(gamma) are set to zero wherever |e_m^(gamma)| <= eps and
the fraction of suppressed samples is reported per m.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .basis import BasisFamily
from .hamiltonian import HamiltonianMatrix
from .numerics import (
    ComplexField,
    FrequencyGrid,
    SpatialGrid,
    forward_ft,
    inner_product,
    inverse_ft,
    pairwise_sum,
)

DEFAULT_EPS = 1e-6


@dataclass(eq=False)
class KernelSetup:
    family: BasisFamily
    R: np.ndarray
    fg: FrequencyGrid
    eps: float = DEFAULT_EPS
    c: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if isinstance(self.R, HamiltonianMatrix):
            self.meta.setdefault("potential", self.R.potential.describe())
            self.R = self.R.entries
        self.R = np.asarray(self.R, dtype=complex)
        N = self.family.order
        if self.R.shape != (N, N):
            raise ValueError(f"R has shape {self.R.shape}, basis has N={N}")
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        self.c = np.ones(N, dtype=complex) if self.c is None else np.asarray(self.c, dtype=complex)
        if self.c.shape != (N,):
            raise ValueError("c must have one weight per basis element")

    @property
    def N(self) -> int:
        return self.family.order

    @cached_property
    def ft(self) -> np.ndarray:
        """e_k^ sampled on the frequency grid, shape (N, M)."""
        return self.family.ft_table(self.fg.points)

    @cached_property
    def guard(self) -> np.ndarray:
        """Boolean (N, M): True where |e_m^| > eps."""
        return np.abs(self.ft) > self.eps

    @cached_property
    def discarded_mass(self) -> np.ndarray:
        return 1.0 - self.guard.mean(axis=1)

    @cached_property
    def ratio_tensor(self) -> np.ndarray:
        """ratio[s, m, l] = <e_s^/e_m^ | e_l^>_freq with the eps guard."""
        N = self.N
        w = self.fg.weights / (2.0 * np.pi)
        conj_l = np.conj(self.ft)
        out = np.empty((N, N, N), dtype=complex)
        for m in range(N):
            den = np.where(self.guard[m], self.ft[m], 1.0)
            rho = np.where(self.guard[m], self.ft / den, 0.0)          # (s, M)
            out[:, m, :] = pairwise_sum(rho[:, None, :] * conj_l[None, :, :] * w)
        return out

    def with_R(self, R) -> "KernelSetup":
        return KernelSetup(self.family, R, self.fg, self.eps, self.c, dict(self.meta))

    def digest(self) -> dict:
        return {
            "family": self.family.kind, "N": self.N, "a": self.family.a, "w": self.family.w,
            "eps": self.eps, "gamma_max": self.fg.gamma_max, "m": self.fg.m,
            **self.meta,
        }


def ratio_inner_product(setup: KernelSetup, s: int, m: int, l: int) -> complex:
    """(1/2 pi) int [e_s^/e_m^] conj(e_l^) dgamma, zero where |e_m^| <= eps."""
    for idx in (s, m, l):
        setup.family._check_index(idx)
    return complex(setup.ratio_tensor[s, m, l])


@dataclass(eq=False)
class KernelCoefficients:
    K: np.ndarray          # K[m, s]
    mu: np.ndarray         # mu[s, m]
    discarded_mass: np.ndarray

    @property
    def N(self) -> int:
        return self.K.shape[0]


def kernel_coeffs(setup: KernelSetup) -> KernelCoefficients:
    """K[m, s] = sum_l R[m, l] ratio(s, m, l) and mu[s, m] = sum_l conj(R[m, l]) ratio(s, m, l).

    The two coincide for real R.
    """
    rt = setup.ratio_tensor
    R = setup.R
    # terms[s, m, l]
    K = pairwise_sum(R[None, :, :] * rt).T
    mu = pairwise_sum(np.conj(R)[None, :, :] * rt)
    if not (np.all(np.isfinite(K)) and np.all(np.isfinite(mu))):
        raise ValueError("non-finite kernel coefficients")
    return KernelCoefficients(K, mu, setup.discarded_mass.copy())


def h_symbols(setup: KernelSetup, coeffs: KernelCoefficients) -> np.ndarray:
    """h_s^(gamma) = sum_m mu[s, m] e_m^(gamma) for every s; shape (N, M)."""
    return pairwise_sum(coeffs.mu[:, :, None] * setup.ft[None, :, :], axis=1)


def h_symbol(setup: KernelSetup, coeffs: KernelCoefficients, s: int) -> ComplexField:
    setup.family._check_index(s)
    return ComplexField(h_symbols(setup, coeffs)[s], setup.fg)


@dataclass(eq=False)
class PropagationSymbol:
    field: ComplexField
    meta: dict = field(default_factory=dict)

    @property
    def samples(self) -> np.ndarray:
        return self.field.samples

    @property
    def fg(self) -> FrequencyGrid:
        return self.field.grid

    @classmethod
    def injected(cls, func, fg: FrequencyGrid, **meta) -> "PropagationSymbol":
        """Symbol given directly as a function of gamma (e.g. -gamma**2)."""
        vals = np.broadcast_to(np.asarray(func(fg.points), dtype=complex), fg.points.shape)
        return cls(ComplexField(vals.copy(), fg), {"source": "injected", **meta})

    @classmethod
    def zero(cls, fg: FrequencyGrid) -> "PropagationSymbol":
        return cls.injected(lambda g: 0.0, fg)


def propagation_symbol(setup: KernelSetup, coeffs: KernelCoefficients,
                       literal_eq4: bool = False) -> PropagationSymbol:
    """K(gamma) = sum_k c_k h_k^(gamma) e_k^(gamma).

    The same quantity is also assembled as the flat double sum
    sum_{k,m} c_k mu[k, m] e_m^ e_k^ and the pointwise difference stored in
    ``meta['cross_check']``.  ``literal_eq4=True`` multiplies by the
    untransformed e_k evaluated at gamma instead of e_k^.
    """
    fg = setup.fg
    outer = setup.family.table(fg.points) if literal_eq4 else setup.ft
    h = h_symbols(setup, coeffs)
    composed = pairwise_sum(setup.c[:, None] * h * outer, axis=0)
    N, M = setup.N, fg.m
    terms = (setup.c[:, None, None] * coeffs.mu[:, :, None]
             * setup.ft[None, :, :] * outer[:, None, :]).reshape(N * N, M)
    double = pairwise_sum(terms, axis=0)
    if not np.all(np.isfinite(composed)):
        raise ValueError("non-finite propagation symbol")
    meta = {
        **setup.digest(),
        "literal_eq4": literal_eq4,
        "cross_check": float(np.max(np.abs(composed - double))),
        "discarded_mass": [float(v) for v in coeffs.discarded_mass],
        "source": "kernel-construction",
    }
    return PropagationSymbol(ComplexField(composed, fg), meta)


def basis_coefficients(f: ComplexField, family: BasisFamily) -> np.ndarray:
    """<f|e_k> for all k."""
    tab = family.table(f.grid.points)
    return np.array([inner_product(f, ComplexField(row, f.grid)) for row in tab])


def apply_S(f: ComplexField, setup: KernelSetup, matrix: np.ndarray | None = None) -> ComplexField:
    """sum_{k,l} M[k, l] <f|e_k> e_l(x); M defaults to the kernel coefficients."""
    if not isinstance(f.grid, SpatialGrid):
        raise TypeError("apply_S expects a field on a spatial grid")
    M = kernel_coeffs(setup).K if matrix is None else np.asarray(matrix, dtype=complex)
    a = basis_coefficients(f, setup.family)
    out_coef = pairwise_sum(M * a[:, None], axis=0)           # over k
    tab = setup.family.table(f.grid.points)
    return ComplexField(pairwise_sum(out_coef[:, None] * tab, axis=0), f.grid)


def apply_T_hat(f: ComplexField, setup: KernelSetup, h: np.ndarray) -> ComplexField:
    """(Tf)^(gamma) = sum_k c_k <f^|h_k^>_freq f^(gamma) e_k^(gamma)."""
    F = forward_ft(f, setup.fg)
    weights = np.array([inner_product(F, ComplexField(hk, setup.fg)) for hk in h])
    mult = pairwise_sum((setup.c * weights)[:, None] * setup.ft, axis=0)
    return ComplexField(F.samples * mult, setup.fg)


def apply_T(f: ComplexField, setup: KernelSetup, h: np.ndarray | None = None) -> ComplexField:
    """T f = sum_k c_k <f|h_k> (e_k * f), evaluated through the frequency domain.

    T is quadratic in f.
    """
    if h is None:
        h = h_symbols(setup, kernel_coeffs(setup))
    return inverse_ft(apply_T_hat(f, setup, h), f.grid)
