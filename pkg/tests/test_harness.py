import math

import numpy as np
import pytest

from kernelsolve.basis import BasisFamily
from kernelsolve.hamiltonian import Potential, matrix_elements
from kernelsolve.harness import (
    CLAIMS, FAILS, HOLDS, MEASURED, DiscrepancyRecord, NumericalAbort, check_condition_i,
    check_condition_ii, check_eq1, check_eq4_residual, check_eq4_vs_reference,
    check_lemma_expansion, compare, eq4_sampler, lemma_forms, oracle_self_tests, residual_check,
)
from kernelsolve.kernel import KernelSetup, PropagationSymbol, h_symbols, kernel_coeffs, propagation_symbol
from kernelsolve.numerics import ComplexField, FrequencyGrid, GridMismatchError, forward_ft
from kernelsolve.propagator import PropagationRequest, evolve
from kernelsolve.reference import EvolutionParams, analytic_oracle, crank_nicolson

HARMONIC = Potential.harmonic()


@pytest.fixture(scope="module")
def herm8(fg):
    fam = BasisFamily("hermite", 8)
    return KernelSetup(fam, matrix_elements(fam, HARMONIC), fg)


@pytest.fixture(scope="module")
def e0(sg):
    return BasisFamily("hermite", 1).field(0, sg)


def test_compare_examples(gaussian, fg):
    m = compare(gaussian, gaussian)
    assert m.rel_l2 == 0 and abs(abs(m.overlap) - 1) <= 1e-12
    neg = ComplexField(-gaussian.samples, gaussian.grid)
    m = compare(gaussian, neg)
    assert m.rel_l2 == pytest.approx(2.0) and m.overlap == pytest.approx(-1.0)
    zero = ComplexField(np.zeros(gaussian.grid.n), gaussian.grid)
    assert compare(zero, zero).rel_l2 == 0.0
    with pytest.raises(GridMismatchError):
        compare(gaussian, forward_ft(gaussian, fg))


def test_compare_heat_reference(gaussian, sg):
    p = EvolutionParams.preset("imaginary-time", 0.5, 1e-3)
    oracle = analytic_oracle("free-gaussian-heat", p.alpha, p.beta, p.t, sg)
    assert compare(oracle, crank_nicolson(gaussian, Potential.zero(), p)).rel_l2 <= 1e-4


def test_record_validation():
    with pytest.raises(ValueError):
        DiscrepancyRecord("eq9", {}, {}, MEASURED)
    with pytest.raises(ValueError):
        DiscrepancyRecord("eq1", {}, {}, "maybe")
    with pytest.raises(NumericalAbort):
        DiscrepancyRecord("eq1", {}, {"x": math.nan}, MEASURED)
    rec = DiscrepancyRecord("eq1", {"seed": 3}, {"x": 1}, HOLDS)
    d = rec.to_dict()
    assert d["metrics"] == {"x": 1.0} and d["inputs_digest"] == rec.digest
    assert rec.digest == DiscrepancyRecord("eq1", {"seed": 3}, {}, FAILS).digest
    assert "eq1" in rec.summary()


def test_eq1_zero_field(sg, herm8):
    rec = check_eq1(ComplexField(np.zeros(sg.n), sg), herm8)
    assert rec.metrics["rel_l2"] == 0.0 and rec.verdict == HOLDS


def test_eq1_degrees(e0, herm8):
    rec = check_eq1(e0, herm8)
    assert rec.claim == "eq1"
    assert rec.metrics["lhs_degree"] == pytest.approx(2.0, abs=1e-10)
    assert rec.metrics["rhs_degree"] == pytest.approx(2.0, abs=1e-10)
    assert rec.verdict in (HOLDS, MEASURED)


def test_eq1_single_mode(sg, fg):
    fam = BasisFamily("gaussian-frame", 1)
    st = KernelSetup(fam, matrix_elements(fam, Potential.zero()), fg)
    rec = check_eq1(fam.field(0, sg), st)
    assert all(math.isfinite(v) for v in rec.metrics.values())


def test_lemma_forms_on_e0(e0, herm8):
    co = kernel_coeffs(herm8)
    direct, double, _ = lemma_forms(e0, herm8, co, h_symbols(herm8, co))
    assert np.max(np.abs(direct - double)) <= 1e-8 * np.max(np.abs(direct))


def test_lemma_zero_operator(sg, fg):
    fam = BasisFamily("gaussian-frame", 4)
    st = KernelSetup(fam, np.zeros((4, 4)), fg)
    co = kernel_coeffs(st)
    forms = lemma_forms(fam.field(1, sg), st, co, h_symbols(st, co))
    assert all(not np.any(f) for f in forms)


def test_lemma_trials_recorded(herm8):
    rec = check_lemma_expansion(herm8, trials=16, seed=11)
    assert rec.verdict == HOLDS
    assert all(f"trial{i}_T" in rec.metrics for i in range(16))
    assert rec.inputs["seed"] == 11
    again = check_lemma_expansion(herm8, trials=16, seed=11)
    assert again.metrics == rec.metrics
    with pytest.raises(ValueError):
        check_lemma_expansion(herm8, trials=0)


def test_lemma_non_orthogonal_is_measured(fg):
    fam = BasisFamily("gaussian-frame", 6)
    st = KernelSetup(fam, matrix_elements(fam, HARMONIC), fg)
    rec = check_lemma_expansion(st, trials=2)
    assert rec.metrics["max_S_expansion_discrepancy"] <= 1e-8
    assert rec.verdict in (HOLDS, MEASURED)


def test_residual_of_crank_nicolson(e0):
    p = EvolutionParams.preset("imaginary-time", 0.5, 1e-3)

    def u_at(tau):
        q = EvolutionParams.for_time(p.alpha, p.beta, tau, 1e-3)
        return crank_nicolson(e0, HARMONIC, q)

    assert residual_check(u_at, HARMONIC, p, 0.5).metrics["rel_residual"] <= 1e-4


@pytest.mark.parametrize("preset,n", [("imaginary-time", 0), ("imaginary-time", 3), ("real-time", 2)])
def test_residual_of_analytic(sg, preset, n):
    p = EvolutionParams.preset(preset, 0.5, 1e-3)
    u_at = lambda tau: analytic_oracle("harmonic-eigenstate", p.alpha, p.beta, tau, sg, n=n)
    rec = residual_check(u_at, HARMONIC, p, 0.5)
    assert rec.metrics["rel_residual"] <= 1e-6 and rec.verdict == MEASURED


def test_residual_needs_room(e0):
    p = EvolutionParams.preset("imaginary-time", 0.5, 1e-3)
    with pytest.raises(ValueError):
        residual_check(lambda tau: e0, HARMONIC, p, 5e-5)


def test_eq4_records_paper_literal(e0, herm8):
    p = EvolutionParams.preset("paper-literal", 0.1, 1e-3)
    sym = propagation_symbol(herm8, kernel_coeffs(herm8))
    rec = check_eq4_residual(e0, herm8, sym, HARMONIC, p, 0.1, 50.0)
    assert rec.verdict == MEASURED
    assert {"rel_residual", "multiplier_residual", "T_residual"} <= set(rec.metrics)
    # the literal symbol transports the state out of the box; the record says so
    assert rec.metrics["boundary_rel_abs"] > 1e-3
    assert rec.metrics["roundtrip_defect"] > 1e-3
    u, _ = evolve(PropagationRequest(e0, sym, p.t))
    rec2, refs = check_eq4_vs_reference(u, e0, HARMONIC, p, 50.0)
    assert "cn_abort_step" in rec2.metrics
    assert "split_step" in refs and "crank_nicolson" not in refs
    assert all(math.isfinite(v) for v in rec2.metrics.values())


def test_eq4_residual_contained_case(gaussian, herm8):
    """With the heat symbol injected, both residual readings vanish."""
    sym = PropagationSymbol.injected(lambda g: -g**2, herm8.fg)
    p = EvolutionParams.preset("imaginary-time", 0.2, 1e-3)
    rec = check_eq4_residual(gaussian, herm8, sym, Potential.zero(), p, 0.2, 50.0)
    assert rec.metrics["boundary_rel_abs"] <= 1e-10
    assert rec.metrics["roundtrip_defect"] <= 1e-10
    assert rec.metrics["multiplier_residual"] <= 1e-6
    assert rec.metrics["rel_residual"] <= 1e-6


def test_eq4_sampler_at_zero(e0, herm8):
    sym = propagation_symbol(herm8, kernel_coeffs(herm8))
    assert np.array_equal(eq4_sampler(e0, sym, 50.0)(0.0).samples, e0.samples)


def test_condition_records(fg):
    rec = check_condition_i(BasisFamily("hermite", 4), *_grids(3.0), eps=1e-6)
    assert rec.verdict == FAILS and rec.metrics["satisfied_count"] == 1.0
    rec = check_condition_i(BasisFamily("gaussian-frame", 8), *_grids(3.0), eps=1e-6)
    assert rec.verdict == HOLDS
    rec2, drift = check_condition_ii(BasisFamily("gaussian-frame", 6), HARMONIC, 1.0, -1.0, fg, 1e-6)
    assert drift.shape == (6, 6) and rec2.claim == "condition-ii-stability"
    rec3, drift3 = check_condition_ii(BasisFamily("gaussian-frame", 6), HARMONIC, 1.0, -1.0, fg, 1e-6)
    assert drift3.tobytes() == drift.tobytes() and rec3.metrics == rec2.metrics


def _grids(gamma_max):
    from kernelsolve.numerics import STANDARD_SPATIAL
    return STANDARD_SPATIAL, FrequencyGrid(gamma_max, 1024)


def test_condition_ii_hermite_embedding(fg):
    fam = BasisFamily("hermite", 4)
    rec, drift = check_condition_ii(fam, HARMONIC, -1, 1, fg, 1e-6)
    # diagonal R: K for the first rows only depends on those rows
    assert np.max(np.abs(drift)) <= 1e-12


def test_oracle_self_tests_pass():
    tests = oracle_self_tests()
    assert len(tests) == 5 and all(t["passed"] for t in tests)


def test_claim_ids():
    assert set(CLAIMS) == {"eq1", "lemma-expansion", "eq4-residual", "eq4-vs-reference",
                           "condition-i", "condition-ii-stability"}
