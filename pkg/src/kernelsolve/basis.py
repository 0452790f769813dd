"""Basis families {e_k} with analytic derivatives and Fourier transforms.

Two families are provided:

``hermite``
    Orthonormal Hermite functions.  Their transforms vanish at the real
    zeros of H_n for every n >= 1.
``gaussian-frame``
    Unit-norm Gaussians of width ``w`` centred on ``c_k = (k - (N-1)/2) a``.
    Transforms never vanish, but the family is not orthonormal.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .numerics import ComplexField, FrequencyGrid, SpatialGrid, inner_product

KINDS = ("hermite", "gaussian-frame")


@dataclass(frozen=True)
class BasisFamily:
    kind: str
    order: int
    a: float = 1.0
    w: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown basis kind {self.kind!r}; expected one of {KINDS}")
        if int(self.order) != self.order or self.order < 1:
            raise ValueError(f"basis order must be a positive integer, got {self.order}")
        if self.kind == "gaussian-frame" and not (self.a > 0 and self.w > 0):
            raise ValueError("gaussian-frame needs a > 0 and w > 0")

    @property
    def is_orthonormal(self) -> bool:
        return self.kind == "hermite"

    @property
    def centers(self) -> np.ndarray:
        k = np.arange(self.order)
        return (k - (self.order - 1) / 2.0) * self.a

    def _check_index(self, k):
        if not 0 <= k < self.order:
            raise IndexError(f"basis index {k} out of range 0..{self.order - 1}")

    def table(self, x, derivative_order: int = 0) -> np.ndarray:
        """All elements (or a derivative) at points ``x``; shape ``(N, len(x))``."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if derivative_order not in (0, 1, 2):
            raise ValueError("derivative_order must be 0, 1 or 2")
        if self.kind == "hermite":
            return _hermite_table(self.order, x, derivative_order)
        return _gaussian_table(self.centers, self.w, x, derivative_order)

    def ft_table(self, gamma) -> np.ndarray:
        """Analytic transforms e_k^(gamma) of all elements; shape ``(N, len(gamma))``."""
        g = np.atleast_1d(np.asarray(gamma, dtype=float))
        if self.kind == "hermite":
            phase = (-1j) ** np.arange(self.order)
            return np.sqrt(2 * np.pi) * phase[:, None] * _hermite_functions(self.order, g)
        amp = (4 * np.pi * self.w**2) ** 0.25 * np.exp(-0.5 * self.w**2 * g**2)
        return amp * np.exp(-1j * np.outer(self.centers, g))

    def field(self, k: int, grid: SpatialGrid, derivative_order: int = 0) -> ComplexField:
        self._check_index(k)
        return ComplexField(self.table(grid.points, derivative_order)[k], grid)

    def ft_field(self, k: int, fg: FrequencyGrid) -> ComplexField:
        self._check_index(k)
        return ComplexField(self.ft_table(fg.points)[k], fg)


def _hermite_functions(nmax: int, x: np.ndarray) -> np.ndarray:
    """Normalized Hermite functions e_0..e_{nmax-1} by the three-term recurrence."""
    out = np.empty((nmax, len(x)))
    out[0] = np.pi ** -0.25 * np.exp(-0.5 * x * x)
    if nmax > 1:
        out[1] = np.sqrt(2.0) * x * out[0]
    for n in range(1, nmax - 1):
        out[n + 1] = np.sqrt(2.0 / (n + 1)) * x * out[n] - np.sqrt(n / (n + 1)) * out[n - 1]
    return out


def _hermite_table(N, x, d):
    e = _hermite_functions(N + 2, x)
    if d == 0:
        return e[:N]
    n = np.arange(N)[:, None]
    lower = np.vstack([np.zeros((1, len(x))), e[: N - 1]])   # e_{n-1}
    if d == 1:
        return np.sqrt(n / 2.0) * lower - np.sqrt((n + 1) / 2.0) * e[1 : N + 1]
    # ladder form of the second derivative: e_{n-2}, e_n, e_{n+2}
    lower2 = np.vstack([np.zeros((2, len(x))), e[: max(N - 2, 0)]])[:N]
    return (0.5 * np.sqrt(n * (n - 1.0)) * lower2 - (n + 0.5) * e[:N]
            + 0.5 * np.sqrt((n + 1.0) * (n + 2.0)) * e[2 : N + 2])


def _gaussian_table(centers, w, x, d):
    u = x[None, :] - centers[:, None]
    g = (np.pi * w * w) ** -0.25 * np.exp(-0.5 * u * u / (w * w))
    if d == 0:
        return g
    if d == 1:
        return -u / (w * w) * g
    return (u * u / w**4 - 1.0 / (w * w)) * g


def eval_element(family: BasisFamily, k: int, x, derivative_order: int = 0):
    family._check_index(k)
    vals = family.table(x, derivative_order)[k]
    return vals[0] if np.ndim(x) == 0 else vals


def element_ft(family: BasisFamily, k: int, gamma):
    family._check_index(k)
    vals = family.ft_table(gamma)[k]
    return vals[0] if np.ndim(gamma) == 0 else vals


@dataclass(eq=False)
class ConditionReport:
    family: BasisFamily
    gram: np.ndarray
    min_abs_ft: np.ndarray
    condition_i_satisfied: np.ndarray
    eps: float

    def to_dict(self) -> dict:
        return {
            "family": self.family.kind,
            "N": self.family.order,
            "eps": self.eps,
            "min_abs_ft": [float(v) for v in self.min_abs_ft],
            "condition_i_satisfied": [bool(v) for v in self.condition_i_satisfied],
            "gram_max_offdiag": float(np.max(np.abs(self.gram - np.diag(np.diag(self.gram))))),
            "gram_max_diag_error": float(np.max(np.abs(np.diag(self.gram) - 1.0))),
        }


def gram_matrix(family: BasisFamily, sg: SpatialGrid) -> np.ndarray:
    tab = family.table(sg.points)
    fields = [ComplexField(row, sg) for row in tab]
    N = family.order
    G = np.empty((N, N), dtype=complex)
    for k in range(N):
        for l in range(N):
            G[k, l] = inner_product(fields[k], fields[l])
    return G


def min_abs_transform(family: BasisFamily, k: int, fg: FrequencyGrid) -> float:
    """Minimum of |e_k^| over the continuous band ``[-gamma_max, gamma_max]``.

    Sampled local minima are refined with a bounded scalar minimizer on
    ``|e_k^|^2``, so real roots falling between samples are still found.
    """
    g = fg.points
    a2 = np.abs(family.ft_table(g)[k]) ** 2
    best = float(a2.min())
    interior = np.flatnonzero((a2[1:-1] <= a2[:-2]) & (a2[1:-1] <= a2[2:])) + 1

    def obj(gamma):
        return float(np.abs(family.ft_table(gamma)[k, 0]) ** 2)

    for i in interior:
        res = minimize_scalar(obj, bounds=(g[i - 1], g[i + 1]), method="bounded",
                              options={"xatol": 1e-14})
        best = min(best, float(res.fun))
    return float(np.sqrt(best))


def condition_check(family: BasisFamily, sg: SpatialGrid, fg: FrequencyGrid,
                    eps: float = 1e-6) -> ConditionReport:
    """Gram matrix and the no-real-roots test ``min |e_k^| > eps`` for every element."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    mins = np.array([min_abs_transform(family, k, fg) for k in range(family.order)])
    return ConditionReport(family, gram_matrix(family, sg), mins, mins > eps, eps)
