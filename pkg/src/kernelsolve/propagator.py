"""Multiplier propagation u(t) = F^-1[ f^ e^{tK} + g^ (e^{tK} - 1)/K ]."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .basis import BasisFamily
from .hamiltonian import Potential, generator_matrix
from .kernel import KernelSetup, PropagationSymbol, kernel_coeffs, propagation_symbol
from .numerics import (
    STANDARD_FREQUENCY,
    ComplexField,
    FrequencyGrid,
    GridMismatchError,
    QuadratureRule,
    SpatialGrid,
    forward_ft,
    inverse_ft,
)

DEFAULT_GROWTH_CAP = 50.0
SERIES_THRESHOLD = 1e-12


@dataclass(eq=False)
class PropagationRequest:
    f: ComplexField
    symbol: PropagationSymbol
    t: float
    g: ComplexField | None = None
    growth_cap: float = DEFAULT_GROWTH_CAP

    def __post_init__(self):
        if not self.t >= 0:
            raise ValueError(f"t must be >= 0, got {self.t}")
        if not isinstance(self.f.grid, SpatialGrid):
            raise GridMismatchError("initial condition must live on a spatial grid")
        if self.g is not None and self.g.grid != self.f.grid:
            raise GridMismatchError("f and g must share a grid")


@dataclass
class OverflowReport:
    growth_cap: float
    flagged_fraction: float
    max_exponent: float
    flagged_indices: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"growth_cap": self.growth_cap if math.isfinite(self.growth_cap) else "inf",
                "flagged_fraction": self.flagged_fraction,
                "max_exponent": self.max_exponent,
                "flagged_count": len(self.flagged_indices)}


def _duhamel_factor(K, t, z):
    """int_0^t e^{(t-s)K} ds, with the exponent z = tK possibly clamped."""
    out = np.empty_like(K)
    small = np.abs(K) <= SERIES_THRESHOLD
    big = ~small
    out[big] = np.expm1(z[big]) / K[big]
    tk = t * K[small]
    out[small] = t * (1.0 + tk / 2.0 + tk * tk / 6.0)
    return out


def multiplier(symbol: np.ndarray, t: float, growth_cap: float = DEFAULT_GROWTH_CAP):
    """Return ``(e^{tK}, duhamel factor, report)`` with the growth clamp applied."""
    K = np.asarray(symbol, dtype=complex)
    z = t * K
    flagged = z.real > growth_cap
    z = np.where(flagged, growth_cap + 1j * z.imag, z)
    report = OverflowReport(float(growth_cap), float(flagged.mean()),
                            float(np.max(t * K.real)) if K.size else 0.0,
                            [int(i) for i in np.flatnonzero(flagged)])
    with np.errstate(over="ignore", invalid="ignore"):
        return np.exp(z), _duhamel_factor(K, t, z), report


def evolve(req: PropagationRequest) -> tuple[ComplexField, OverflowReport]:
    fg = req.symbol.fg
    sg = req.f.grid
    if req.t == 0 and req.g is None:
        out = ComplexField(req.f.samples.copy(), sg)
        return out, OverflowReport(float(req.growth_cap), 0.0, 0.0)
    E, D, report = multiplier(req.symbol.samples, req.t, req.growth_cap)
    with np.errstate(over="ignore", invalid="ignore"):
        spec = forward_ft(req.f, fg).samples * E
        if req.g is not None:
            spec = spec + forward_ft(req.g, fg).samples * D
        ok = np.all(np.isfinite(spec))
    if not ok:
        raise FloatingPointError(
            "multiplier overflow; use a finite growth_cap")
    u = inverse_ft(ComplexField(spec, fg), sg)
    u.flags.update(report.to_dict())
    return u, report


def evolve_field(f, symbol, t, g=None, growth_cap=DEFAULT_GROWTH_CAP) -> ComplexField:
    return evolve(PropagationRequest(f, symbol, t, g, growth_cap))[0]


def build_symbol(family: BasisFamily, V: Potential, fg: FrequencyGrid = STANDARD_FREQUENCY,
                 eps: float = 1e-6, alpha: complex = -1.0, beta: complex = 1.0,
                 quad: QuadratureRule | None = None, literal_eq4: bool = False,
                 zero_hamiltonian: bool = False):
    """Matrix elements -> kernel coefficients -> propagation symbol."""
    R = generator_matrix(family, V, alpha, beta, quad)
    setup = KernelSetup(family, R, fg, eps, meta={"potential": V.describe()})
    if zero_hamiltonian:
        setup = setup.with_R(np.zeros_like(setup.R))
    coeffs = kernel_coeffs(setup)
    return setup, coeffs, propagation_symbol(setup, coeffs, literal_eq4=literal_eq4)


def schrodinger_general_solution(f: ComplexField, family: BasisFamily, V: Potential, t: float,
                                 eps: float = 1e-6, fg: FrequencyGrid = STANDARD_FREQUENCY,
                                 growth_cap: float = DEFAULT_GROWTH_CAP,
                                 alpha: complex = -1.0, beta: complex = 1.0,
                                 literal_eq4: bool = False, zero_hamiltonian: bool = False,
                                 quad: QuadratureRule | None = None):
    """Psi(t) from the kernel-construction symbol, g = 0.

    Returns ``(field, provenance)``; provenance carries N, eps, discarded
    mass, the overflow fraction and the symbol itself.
    """
    if not t >= 0:
        raise ValueError("t must be >= 0")
    setup, coeffs, symbol = build_symbol(family, V, fg, eps, alpha, beta, quad,
                                         literal_eq4, zero_hamiltonian)
    u, report = evolve(PropagationRequest(f, symbol, t, None, growth_cap))
    provenance = {
        "N": family.order,
        "family": family.kind,
        "eps": eps,
        "t": t,
        "alpha": [complex(alpha).real, complex(alpha).imag],
        "beta": [complex(beta).real, complex(beta).imag],
        "discarded_mass": [float(v) for v in coeffs.discarded_mass],
        "overflow": report.to_dict(),
        "symbol_cross_check": symbol.meta["cross_check"],
        "symbol": symbol,
    }
    return u, provenance
