"""Checks of the kernel-construction claims, with structured, reproducible records.

Verdicts are three-valued.  ``fails`` is only issued for identities the
package can decide on its own (basis side conditions, finite-sum
rewritings on an orthonormal basis); the solution formula itself is
always ``measured-only``.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .basis import BasisFamily, condition_check
from .hamiltonian import Potential, generator_matrix, matrix_elements, second_derivative
from .kernel import (
    KernelSetup,
    apply_S,
    apply_T,
    apply_T_hat,
    h_symbols,
    kernel_coeffs,
    propagation_symbol,
)
from .numerics import (
    STANDARD_FREQUENCY,
    STANDARD_SPATIAL,
    ComplexField,
    FrequencyGrid,
    GridMismatchError,
    SpatialGrid,
    forward_ft,
    inner_product,
    inverse_ft,
    l2_norm,
    pairwise_sum,
)
from .propagator import PropagationRequest, evolve, multiplier
from .reference import (
    EvolutionParams,
    NonFiniteStateError,
    analytic_oracle,
    crank_nicolson,
    split_step,
)

CLAIMS = ("eq1", "lemma-expansion", "eq4-residual", "eq4-vs-reference",
          "condition-i", "condition-ii-stability")
HOLDS, FAILS, MEASURED = "holds-within-tol", "fails", "measured-only"

EQ1_TOL = 1e-6
LEMMA_TOL = 1e-8


class NumericalAbort(FloatingPointError):
    pass


class OracleFailure(RuntimeError):
    pass


def digest_of(obj) -> str:
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()


@dataclass(eq=False)
class DiscrepancyRecord:
    claim: str
    inputs: dict
    metrics: dict
    verdict: str
    artifacts: list = field(default_factory=list)

    def __post_init__(self):
        if self.claim not in CLAIMS:
            raise ValueError(f"unknown claim id {self.claim!r}")
        if self.verdict not in (HOLDS, FAILS, MEASURED):
            raise ValueError(f"unknown verdict {self.verdict!r}")
        self.metrics = {k: float(v) for k, v in self.metrics.items()}
        bad = [k for k, v in self.metrics.items() if not math.isfinite(v)]
        if bad:
            raise NumericalAbort(f"{self.claim}: non-finite metrics {bad}")

    @property
    def digest(self) -> str:
        return digest_of(self.inputs)

    def to_dict(self) -> dict:
        return {"claim": self.claim, "inputs": self.inputs, "inputs_digest": self.digest,
                "metrics": self.metrics, "verdict": self.verdict,
                "artifacts": list(self.artifacts)}

    def summary(self) -> str:
        tag = self.inputs.get("label", "")
        shown = ", ".join(f"{k}={v:.3e}" for k, v in list(self.metrics.items())[:3])
        return f"{self.claim:<24} {tag:<40} {self.verdict:<17} {shown}"


@dataclass(frozen=True)
class ComparisonMetrics:
    rel_l2: float
    max_abs: float
    overlap: complex

    def as_metrics(self, prefix: str = "") -> dict:
        return {f"{prefix}rel_l2": self.rel_l2, f"{prefix}max_abs": self.max_abs,
                f"{prefix}overlap_re": self.overlap.real, f"{prefix}overlap_im": self.overlap.imag}


def compare(a: ComplexField, b: ComplexField) -> ComparisonMetrics:
    """rel_l2 = ||a-b|| / max(||a||, ||b||), max abs difference, normalized overlap <a|b>."""
    if a.grid != b.grid:
        raise GridMismatchError("compare needs fields on the same grid")
    na, nb = l2_norm(a), l2_norm(b)
    diff = ComplexField(a.samples - b.samples, a.grid)
    scale = max(na, nb)
    rel = l2_norm(diff) / scale if scale > 0 else 0.0
    max_abs = float(np.max(np.abs(diff.samples))) if len(diff) else 0.0
    overlap = inner_product(a, b) / (na * nb) if na > 0 and nb > 0 else 0j
    return ComparisonMetrics(float(rel), max_abs, complex(overlap))


def _rel(a: np.ndarray, b: np.ndarray) -> float:
    scale = max(np.max(np.abs(a)), np.max(np.abs(b)))
    return float(np.max(np.abs(a - b)) / scale) if scale > 0 else 0.0


def _eq1_sides(f, setup, coeffs, h):
    lhs = apply_T_hat(f, setup, h)
    Sf = apply_S(f, setup, coeffs.K)
    rhs = ComplexField(forward_ft(f, setup.fg).samples * forward_ft(Sf, setup.fg).samples,
                       setup.fg)
    return lhs, rhs


def check_eq1(f: ComplexField, setup: KernelSetup, inputs: dict | None = None,
              probe: float = 2.0) -> DiscrepancyRecord:
    """Compare (T f)^ against f^ (S f)^ with S built from the kernel coefficients."""
    coeffs = kernel_coeffs(setup)
    h = h_symbols(setup, coeffs)
    lhs, rhs = _eq1_sides(f, setup, coeffs, h)
    m = compare(lhs, rhs)
    metrics = {"rel_l2": m.rel_l2, "max_abs": m.max_abs,
               "lhs_norm": l2_norm(lhs), "rhs_norm": l2_norm(rhs)}
    nl, nr = l2_norm(lhs), l2_norm(rhs)
    if nl > 0 and nr > 0:
        scaled = ComplexField(probe * f.samples, f.grid)
        lhs2, rhs2 = _eq1_sides(scaled, setup, coeffs, h)
        metrics["lhs_degree"] = math.log(l2_norm(lhs2) / nl) / math.log(probe)
        metrics["rhs_degree"] = math.log(l2_norm(rhs2) / nr) / math.log(probe)
        metrics["scaled_rel_l2"] = compare(lhs2, rhs2).rel_l2
    verdict = HOLDS if m.rel_l2 <= EQ1_TOL else MEASURED
    return DiscrepancyRecord("eq1", {**setup.digest(), **(inputs or {})}, metrics, verdict)


def random_span_field(family: BasisFamily, sg: SpatialGrid, rng: np.random.Generator):
    a = rng.standard_normal(family.order) + 1j * rng.standard_normal(family.order)
    return ComplexField(pairwise_sum(a[:, None] * family.table(sg.points), axis=0), sg), a


def lemma_forms(f: ComplexField, setup: KernelSetup, coeffs, h):
    """Direct (T f)^, the double-sum rewriting, and the unconjugated literal variant."""
    fg = setup.fg
    direct = apply_T_hat(f, setup, h).samples
    F = forward_ft(f, fg)
    ek = [ComplexField(row, fg) for row in setup.ft]
    hk = [ComplexField(row, fg) for row in h]
    fe = np.array([inner_product(F, e) for e in ek])                      # <f^|e_k^>
    eh = np.array([[inner_product(e, hl) for hl in hk] for e in ek])      # <e_k^|h_l^>
    he = np.array([[inner_product(hl, e) for hl in hk] for e in ek])      # <h_l^|e_k^>
    wl = pairwise_sum(setup.c[None, :] * eh * fe[:, None], axis=0)
    wl_lit = pairwise_sum(setup.c[None, :] * he * fe[:, None], axis=0)
    double = F.samples * pairwise_sum(wl[:, None] * setup.ft, axis=0)
    literal = F.samples * pairwise_sum(wl_lit[:, None] * setup.ft, axis=0)
    return direct, double, literal


def check_lemma_expansion(setup: KernelSetup, trials: int = 4, seed: int = 0,
                          sg: SpatialGrid = STANDARD_SPATIAL,
                          inputs: dict | None = None) -> DiscrepancyRecord:
    """Kernel-expansion action of S and the double-sum form of (T f)^ on seeded span fields."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    coeffs = kernel_coeffs(setup)
    h = h_symbols(setup, coeffs)
    E = setup.family.table(sg.points)
    kernel = E.T @ coeffs.K @ E            # K(t_i, x_j)
    s_err, t_err, lit_err = [], [], []
    for _ in range(trials):
        f, _ = random_span_field(setup.family, sg, rng)
        expansion = apply_S(f, setup, coeffs.K).samples
        brute = pairwise_sum((sg.weights * f.samples)[:, None] * kernel, axis=0)
        s_err.append(_rel(expansion, brute))
        direct, double, literal = lemma_forms(f, setup, coeffs, h)
        t_err.append(_rel(direct, double))
        lit_err.append(_rel(direct, literal))
    metrics = {"max_S_expansion_discrepancy": max(s_err),
               "max_T_double_sum_discrepancy": max(t_err),
               "max_T_unconjugated_discrepancy": max(lit_err)}
    for i, (a, b) in enumerate(zip(s_err, t_err)):
        metrics[f"trial{i}_S"] = a
        metrics[f"trial{i}_T"] = b
    worst = max(max(s_err), max(t_err))
    if worst <= LEMMA_TOL:
        verdict = HOLDS
    else:
        verdict = FAILS if setup.family.is_orthonormal else MEASURED
    return DiscrepancyRecord("lemma-expansion",
                             {**setup.digest(), "trials": trials, "seed": seed, **(inputs or {})},
                             metrics, verdict)


def pde_residual(u_at: Callable[[float], ComplexField], V: Potential, p: EvolutionParams,
                 t: float, dt: float = 1e-4, fg: FrequencyGrid = STANDARD_FREQUENCY):
    """Return ``(u(t), du/dt by central difference, rhs alpha u_xx + beta V u)``."""
    if t - dt < 0:
        raise ValueError("residual needs t >= dt")
    um, u0, up = u_at(t - dt), u_at(t), u_at(t + dt)
    du = (up.samples - um.samples) / (2.0 * dt)
    rhs = p.alpha * second_derivative(u0, fg).samples + p.beta * V(u0.grid.points) * u0.samples
    return u0, du, rhs


def residual_check(u_at, V: Potential, p: EvolutionParams, t: float, dt: float = 1e-4,
                   fg: FrequencyGrid = STANDARD_FREQUENCY, inputs: dict | None = None,
                   extra: dict | None = None) -> DiscrepancyRecord:
    """||u_t - (alpha u_xx + beta V u)|| / ||u(t)|| with a central difference in time."""
    u0, du, rhs = pde_residual(u_at, V, p, t, dt, fg)
    r = ComplexField(du - rhs, u0.grid)
    nu = l2_norm(u0)
    metrics = {"rel_residual": l2_norm(r) / nu if nu > 0 else l2_norm(r), "u_norm": nu}
    metrics.update(extra or {})
    return DiscrepancyRecord("eq4-residual", {"t": t, "fd_dt": dt, **(inputs or {})},
                             metrics, MEASURED)


def check_condition_i(family: BasisFamily, sg: SpatialGrid, fg: FrequencyGrid,
                      eps: float, inputs: dict | None = None) -> DiscrepancyRecord:
    rep = condition_check(family, sg, fg, eps)
    d = rep.to_dict()
    metrics = {f"min_abs_ft_{k}": v for k, v in enumerate(d["min_abs_ft"])}
    metrics["satisfied_count"] = float(np.sum(rep.condition_i_satisfied))
    metrics["gram_max_offdiag"] = d["gram_max_offdiag"]
    metrics["gram_max_diag_error"] = d["gram_max_diag_error"]
    verdict = HOLDS if rep.condition_i_satisfied.all() else FAILS
    return DiscrepancyRecord("condition-i",
                             {"family": family.kind, "N": family.order, "a": family.a,
                              "w": family.w, "eps": eps, "gamma_max": fg.gamma_max, "m": fg.m,
                              **(inputs or {})},
                             metrics, verdict)


def _embedded_block(small: BasisFamily, big: BasisFamily) -> slice:
    """Indices of the larger family that coincide with the smaller one."""
    if small.kind == "hermite":
        return slice(0, small.order)
    off = (big.order - small.order) // 2
    return slice(off, off + small.order)


def check_condition_ii(family: BasisFamily, V: Potential, alpha, beta, fg: FrequencyGrid,
                       eps: float, extra: int = 4, quad=None,
                       inputs: dict | None = None):
    """Drift of the kernel coefficients and the symbol between N and N + extra.

    Returns ``(record, drift_matrix)``.
    """
    big_family = BasisFamily(family.kind, family.order + extra, family.a, family.w)
    out = []
    for fam in (family, big_family):
        st = KernelSetup(fam, generator_matrix(fam, V, alpha, beta, quad), fg, eps)
        co = kernel_coeffs(st)
        out.append((st, co, propagation_symbol(st, co)))
    (s1, c1, k1), (s2, c2, k2) = out
    blk = _embedded_block(family, big_family)
    drift = c2.K[blk, blk] - c1.K
    scale = float(np.max(np.abs(c1.K))) or 1.0
    sym = compare(k1.field, k2.field)
    metrics = {"max_abs_drift": float(np.max(np.abs(drift))),
               "max_rel_drift": float(np.max(np.abs(drift))) / scale,
               "symbol_rel_l2_drift": sym.rel_l2,
               "max_discarded_mass_N": float(np.max(c1.discarded_mass)),
               "max_discarded_mass_N_plus": float(np.max(c2.discarded_mass)),
               "max_abs_K": scale}
    rec = DiscrepancyRecord("condition-ii-stability",
                            {**s1.digest(), "extra": extra, **(inputs or {})},
                            metrics, MEASURED)
    return rec, drift


def eq4_sampler(f: ComplexField, symbol, growth_cap: float):
    def u_at(tau):
        return evolve(PropagationRequest(f, symbol, tau, None, growth_cap))[0]
    return u_at


def check_eq4_residual(f: ComplexField, setup: KernelSetup, symbol, V: Potential,
                       p: EvolutionParams, t: float, growth_cap: float, dt: float = 1e-4,
                       inputs: dict | None = None) -> DiscrepancyRecord:
    """PDE residual of the multiplier solution, plus the two alternative generator readings.

    ``multiplier_residual`` uses u_t = F^-1[K u^]; ``T_residual`` uses the
    quadratic operator T of the construction.
    """
    u_at = eq4_sampler(f, symbol, growth_cap)
    u0, du, rhs = pde_residual(u_at, V, p, t, dt, setup.fg)
    nu = l2_norm(u0)
    grid = u0.grid
    mult = inverse_ft(ComplexField(symbol.samples * forward_ft(u0, setup.fg).samples, setup.fg),
                      grid).samples
    Tu = apply_T(u0, setup, h_symbols(setup, kernel_coeffs(setup))).samples

    def rel(v):
        n = l2_norm(ComplexField(v, grid))
        return n / nu if nu > 0 else n

    _, report = evolve(PropagationRequest(f, symbol, t, None, growth_cap))
    # containment: a solution transported out of the box wraps and spoils every residual
    spec = forward_ft(f, setup.fg).samples * multiplier(symbol.samples, t, growth_cap)[0]
    back = forward_ft(u0, setup.fg).samples
    peak = float(np.max(np.abs(u0.samples))) or 1.0
    metrics = {"rel_residual": rel(du - rhs),
               "boundary_rel_abs": max(abs(u0.samples[0]), abs(u0.samples[-1])) / peak,
               "roundtrip_defect": float(np.linalg.norm(back - spec) / (np.linalg.norm(spec) or 1.0)),
               "multiplier_residual": rel(du - mult),
               "T_residual": rel(du - Tu),
               "u_norm": nu,
               "flagged_fraction": report.flagged_fraction,
               "max_exponent": report.max_exponent}
    return DiscrepancyRecord("eq4-residual",
                             {**setup.digest(), "preset": p.name, "t": t, "fd_dt": dt,
                              **(inputs or {})},
                             metrics, MEASURED)


def check_eq4_vs_reference(u: ComplexField, f: ComplexField, V: Potential, p: EvolutionParams,
                           growth_cap: float, oracle: ComplexField | None = None,
                           inputs: dict | None = None):
    """Compare the multiplier solution with the oracle (if any), Crank-Nicolson and split-step.

    Returns ``(record, references)`` where ``references`` maps solver name to field.
    """
    metrics: dict = {}
    refs: dict = {}
    if oracle is not None:
        metrics.update(compare(u, oracle).as_metrics("oracle_"))
        refs["oracle"] = oracle
    try:
        cn = crank_nicolson(f, V, p)
        metrics.update(compare(u, cn).as_metrics("cn_"))
        refs["crank_nicolson"] = cn
    except NonFiniteStateError as err:
        metrics["cn_abort_step"] = err.step
    ss = split_step(f, V, p, growth_cap)
    metrics.update(compare(u, ss).as_metrics("split_step_"))
    metrics["split_step_flagged_fraction"] = ss.flags["flagged_fraction"]
    refs["split_step"] = ss
    rec = DiscrepancyRecord("eq4-vs-reference",
                            {"preset": p.name, "t": p.t, "dt": p.dt, **(inputs or {})},
                            metrics, MEASURED)
    return rec, refs


def oracle_self_tests(sg: SpatialGrid = STANDARD_SPATIAL,
                      fg: FrequencyGrid = STANDARD_FREQUENCY) -> list[dict]:
    """Quick checks of the trusted paths; run before any claim is evaluated."""
    x = sg.points
    results = []

    def add(name, value, tol):
        results.append({"name": name, "value": float(value), "tol": tol,
                        "passed": bool(value <= tol)})

    gauss = ComplexField(np.exp(-x**2 / 2), sg)
    F = forward_ft(gauss, fg)
    add("gaussian-transform", np.max(np.abs(F.samples - np.sqrt(2 * np.pi)
                                           * np.exp(-fg.points**2 / 2))), 1e-8)
    back = inverse_ft(F, sg)
    add("round-trip", np.max(np.abs(back.samples - gauss.samples)), 1e-8)
    herm = BasisFamily("hermite", 8)
    R = matrix_elements(herm, Potential.harmonic()).entries
    add("harmonic-matrix", np.max(np.abs(R - np.diag(np.arange(1, 16, 2)))), 1e-8)
    p = EvolutionParams.preset("imaginary-time", 0.5, 1e-3)
    exact = analytic_oracle("free-gaussian-heat", p.alpha, p.beta, p.t, sg)
    add("cn-heat", compare(crank_nicolson(gauss, Potential.zero(), p), exact).rel_l2, 1e-4)
    add("split-step-heat", compare(split_step(gauss, Potential.zero(), p), exact).rel_l2, 1e-6)
    return results
