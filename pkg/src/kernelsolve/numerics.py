"""Grids, sampled fields, Fourier transforms, quadrature and inner products.

Fourier convention used everywhere in the package::

    f^(gamma) = int f(x) exp(-i gamma x) dx
    f(x)      = 1/(2 pi) int f^(gamma) exp(i gamma x) dgamma

Inner products conjugate the *second* argument.  The frequency-domain inner
product carries the 1/(2 pi) factor so that Parseval reads
``<f|g> == <f^|g^>_freq``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Union

import numpy as np
from scipy.signal import czt
from scipy.special import roots_hermite

MIN_SAMPLES = 8


class GridMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class SpatialGrid:
    x_min: float
    x_max: float
    n: int

    def __post_init__(self):
        if not (np.isfinite(self.x_min) and np.isfinite(self.x_max)):
            raise ValueError("grid bounds must be finite")
        if not self.x_min < self.x_max:
            raise ValueError(f"x_min ({self.x_min}) must be < x_max ({self.x_max})")
        if int(self.n) != self.n or self.n < MIN_SAMPLES:
            raise ValueError(f"n must be an integer >= {MIN_SAMPLES}, got {self.n}")

    @property
    def spacing(self) -> float:
        return (self.x_max - self.x_min) / (self.n - 1)

    @cached_property
    def points(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n)

    @cached_property
    def weights(self) -> np.ndarray:
        return trapezoid_weights(self.n, self.spacing)

    def __len__(self):
        return self.n


@dataclass(frozen=True)
class FrequencyGrid:
    gamma_max: float
    m: int

    def __post_init__(self):
        if not (np.isfinite(self.gamma_max) and self.gamma_max > 0):
            raise ValueError(f"gamma_max must be positive and finite, got {self.gamma_max}")
        if int(self.m) != self.m or self.m < MIN_SAMPLES:
            raise ValueError(f"m must be an integer >= {MIN_SAMPLES}, got {self.m}")

    @property
    def spacing(self) -> float:
        return 2.0 * self.gamma_max / (self.m - 1)

    @cached_property
    def points(self) -> np.ndarray:
        g = np.linspace(-self.gamma_max, self.gamma_max, self.m)
        # exact symmetry about zero
        return 0.5 * (g - g[::-1])

    @cached_property
    def weights(self) -> np.ndarray:
        return trapezoid_weights(self.m, self.spacing)

    def __len__(self):
        return self.m


Grid = Union[SpatialGrid, FrequencyGrid]

STANDARD_SPATIAL = SpatialGrid(-12.0, 12.0, 1024)
STANDARD_FREQUENCY = FrequencyGrid(12.0, 1024)


@dataclass(frozen=True, eq=False)
class ComplexField:
    """Complex samples of a function on a spatial or frequency grid.

    ``flags`` carries diagnostics from overflow guards and solvers; it is the
    only place where non-finite samples may be declared.
    """

    samples: np.ndarray
    grid: Grid
    flags: dict = field(default_factory=dict)

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=complex)
        if s.ndim != 1 or s.shape[0] != len(self.grid):
            raise GridMismatchError(
                f"samples length {s.shape} does not match grid size {len(self.grid)}")
        if not self.flags.get("nonfinite_allowed", False) and not np.all(np.isfinite(s)):
            raise ValueError("field contains non-finite samples")
        object.__setattr__(self, "samples", s)

    @classmethod
    def from_function(cls, func, grid: Grid) -> "ComplexField":
        return cls(np.asarray(func(grid.points), dtype=complex), grid)

    @property
    def domain(self) -> str:
        return "spatial" if isinstance(self.grid, SpatialGrid) else "frequency"

    def __len__(self):
        return len(self.samples)


def trapezoid_weights(n: int, h: float) -> np.ndarray:
    w = np.full(n, h)
    w[0] = w[-1] = 0.5 * h
    return w


def pairwise_sum(a, axis: int = -1):
    """Sum along ``axis`` with numpy's pairwise reduction.

    The axis is moved last and made contiguous so that numpy takes the
    pairwise code path; the order is then a fixed function of the length.
    """
    a = np.ascontiguousarray(np.moveaxis(np.asarray(a), axis, -1))
    return np.add.reduce(a, axis=-1)


def _check_input(f: ComplexField, grid_type):
    if not isinstance(f.grid, grid_type):
        raise GridMismatchError(f"expected a field on a {grid_type.__name__}")
    if len(f.grid) < MIN_SAMPLES:
        raise ValueError("grid too small")
    if not np.all(np.isfinite(f.samples)):
        raise ValueError("non-finite input samples")


@lru_cache(maxsize=16)
def _forward_matrix(sg: SpatialGrid, fg: FrequencyGrid) -> np.ndarray:
    # rows: gamma, cols: x; trapezoid weights folded in
    return np.exp(-1j * np.outer(fg.points, sg.points)) * sg.weights


@lru_cache(maxsize=16)
def _inverse_matrix(fg: FrequencyGrid, sg: SpatialGrid) -> np.ndarray:
    return np.exp(1j * np.outer(sg.points, fg.points)) * (fg.weights / (2.0 * np.pi))


def _czt_eval(samples, w, src, dst, sign):
    """sum_j w_j s_j exp(sign*i*dst_k*src_j) by chirp-z."""
    hs = src[1] - src[0]
    dd = dst[1] - dst[0]
    a = np.exp(-sign * 1j * hs * dst[0])
    ww = np.exp(sign * 1j * hs * dd)
    y = czt(samples * w, m=len(dst), w=ww, a=a)
    return y * np.exp(sign * 1j * dst * src[0])


def forward_ft(f: ComplexField, fg: FrequencyGrid, fast: bool = False) -> ComplexField:
    """Trapezoid approximation of ``int f(x) exp(-i gamma x) dx`` on ``fg``."""
    _check_input(f, SpatialGrid)
    sg = f.grid
    if fast:
        out = _czt_eval(f.samples, sg.weights, sg.points, fg.points, -1)
    else:
        out = pairwise_sum(_forward_matrix(sg, fg) * f.samples)
    return ComplexField(out, fg)


def inverse_ft(F: ComplexField, sg: SpatialGrid, fast: bool = False) -> ComplexField:
    """Trapezoid approximation of ``1/(2 pi) int F(gamma) exp(i gamma x) dgamma``."""
    _check_input(F, FrequencyGrid)
    fg = F.grid
    if fast:
        out = _czt_eval(F.samples, fg.weights, fg.points, sg.points, +1) / (2.0 * np.pi)
    else:
        out = pairwise_sum(_inverse_matrix(fg, sg) * F.samples)
    return ComplexField(out, sg)


def inner_product(a: ComplexField, b: ComplexField, domain: str | None = None) -> complex:
    """``<a|b>``, conjugate on ``b``; frequency domain carries 1/(2 pi)."""
    if a.grid != b.grid:
        raise GridMismatchError("inner product of fields on different grids")
    domain = domain or a.domain
    if domain != a.domain:
        raise GridMismatchError(f"fields live in the {a.domain} domain, not {domain}")
    val = pairwise_sum(a.grid.weights * a.samples * np.conj(b.samples))
    if domain == "frequency":
        val = val / (2.0 * np.pi)
    return complex(val)


def l2_norm(f: ComplexField) -> float:
    return float(np.sqrt(max(inner_product(f, f).real, 0.0)))


def energy_leak(f: ComplexField, fg: FrequencyGrid) -> float:
    """Fraction of ``||f^||^2`` lying outside ``[-gamma_max, gamma_max]``.

    The total energy is taken from Parseval on the spatial side; the in-band
    energy from the transform sampled on ``fg``.
    """
    total = inner_product(f, f).real
    if total == 0.0:
        return 0.0
    F = forward_ft(f, fg)
    inband = inner_product(F, F).real
    return float(min(max((total - inband) / total, 0.0), 1.0))


@dataclass(frozen=True)
class QuadratureRule:
    """Either the trapezoid rule on a spatial grid or Gauss-Hermite of a given order."""

    kind: str = "trapezoid"
    grid: SpatialGrid | None = None
    order: int = 0

    def __post_init__(self):
        if self.kind == "trapezoid":
            if self.grid is None:
                object.__setattr__(self, "grid", STANDARD_SPATIAL)
        elif self.kind == "gauss-hermite":
            if self.order < 2:
                raise ValueError("gauss-hermite order must be >= 2")
        else:
            raise ValueError(f"unknown quadrature kind {self.kind!r}")

    @cached_property
    def _gh(self):
        x, w = roots_hermite(self.order)
        # weight function exp(-x^2) folded back in so the rule integrates plain functions
        return x, w * np.exp(x * x)

    def nodes_weights(self, breakpoints=()) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Return ``(nodes, weights, panel_index)``.

        With breakpoints, the trapezoid rule becomes a composite rule whose
        panels end exactly on the breakpoints; nodes on a breakpoint appear
        once per adjacent panel so piecewise integrands see one-sided values.
        """
        if self.kind == "gauss-hermite":
            x, w = self._gh
            return x, w, np.zeros(len(x), dtype=int)
        g = self.grid
        cuts = [c for c in sorted(breakpoints) if g.x_min < c < g.x_max]
        if not cuts:
            return g.points, g.weights, np.zeros(g.n, dtype=int)
        edges = [g.x_min, *cuts, g.x_max]
        xs, ws, ps = [], [], []
        for p, (lo, hi) in enumerate(zip(edges[:-1], edges[1:])):
            k = max(int(np.ceil((hi - lo) / g.spacing)), 2) + 1
            xs.append(np.linspace(lo, hi, k))
            ws.append(trapezoid_weights(k, (hi - lo) / (k - 1)))
            ps.append(np.full(k, p))
        return np.concatenate(xs), np.concatenate(ws), np.concatenate(ps)
