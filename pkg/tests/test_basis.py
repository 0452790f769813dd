import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import eval_hermite

from kernelsolve.basis import (
    BasisFamily, condition_check, element_ft, eval_element, gram_matrix, min_abs_transform,
)
from kernelsolve.numerics import ComplexField, FrequencyGrid, SpatialGrid, forward_ft

PI_QUARTER = np.pi ** -0.25


def closed_form_hermite(n, x):
    """Independent oracle: explicit Hermite polynomial times the Gaussian."""
    return eval_hermite(n, x) * np.exp(-x**2 / 2) / math.sqrt(2.0**n * math.factorial(n) * math.sqrt(math.pi))


def test_hermite_examples():
    herm = BasisFamily("hermite", 4)
    assert eval_element(herm, 0, 0.0) == pytest.approx(0.7511255444649425, abs=1e-15)
    assert eval_element(herm, 1, 0.0) == 0.0
    assert eval_element(herm, 0, 0.0, 2) == pytest.approx(-PI_QUARTER, abs=1e-15)


@pytest.mark.parametrize("n", [0, 1, 5, 12, 23])
def test_recurrence_matches_closed_form(n):
    x = np.linspace(-6, 6, 97)
    got = BasisFamily("hermite", n + 1).table(x)[n]
    assert np.max(np.abs(got - closed_form_hermite(n, x))) <= 1e-12


@pytest.mark.parametrize("n", [0, 1, 2, 7])
def test_hermite_derivatives_against_finite_differences(n):
    x = np.linspace(-4, 4, 41)
    h = 1e-4
    fam = BasisFamily("hermite", n + 1)
    e = lambda y: closed_form_hermite(n, y)
    d1 = (e(x + h) - e(x - h)) / (2 * h)
    d2 = (e(x + h) - 2 * e(x) + e(x - h)) / h**2
    assert np.max(np.abs(fam.table(x, 1)[n] - d1)) <= 1e-7
    assert np.max(np.abs(fam.table(x, 2)[n] - d2)) <= 1e-5


def test_hermite_second_derivative_closed_form():
    x = np.linspace(-5, 5, 51)
    e0 = PI_QUARTER * np.exp(-x**2 / 2)
    assert np.max(np.abs(BasisFamily("hermite", 1).table(x, 2)[0] - (x**2 - 1) * e0)) <= 1e-14


def test_hermite_orthonormality_n24(sg):
    G = gram_matrix(BasisFamily("hermite", 24), sg)
    assert np.max(np.abs(G - np.eye(24))) <= 1e-8


def test_gram_n2_identity(sg):
    assert np.max(np.abs(gram_matrix(BasisFamily("hermite", 2), sg) - np.eye(2))) <= 1e-12


@pytest.mark.parametrize("n", range(0, 24, 3))
def test_eigenrelation(sg, n):
    """-e_n'' + x^2 e_n = (2n+1) e_n."""
    fam = BasisFamily("hermite", 24)
    x = sg.points
    res = -fam.table(x, 2)[n] + x**2 * fam.table(x)[n] - (2 * n + 1) * fam.table(x)[n]
    assert np.max(np.abs(res)) <= 1e-8


def test_hermite_transform_examples(fg):
    herm = BasisFamily("hermite", 2)
    g = fg.points
    exact = np.sqrt(2 * np.pi) * PI_QUARTER * np.exp(-g**2 / 2)
    assert np.max(np.abs(element_ft(herm, 0, g) - exact)) <= 1e-14
    assert element_ft(herm, 1, 0.0) == 0


@pytest.mark.parametrize("kind,k", [("hermite", 0), ("hermite", 3), ("hermite", 10),
                                    ("gaussian-frame", 0), ("gaussian-frame", 4)])
def test_analytic_transform_matches_numeric(sg, fg, kind, k):
    fam = BasisFamily(kind, 11, a=0.7, w=1.3)
    numeric = forward_ft(fam.field(k, sg), fg).samples
    assert np.max(np.abs(numeric - fam.ft_table(fg.points)[k])) <= 1e-8


def test_gaussian_frame_examples(fg):
    fam = BasisFamily("gaussian-frame", 3)
    assert list(fam.centers) == [-1.0, 0.0, 1.0]
    g = fg.points
    exact = (4 * np.pi) ** 0.25 * np.exp(-g**2 / 2)
    assert np.max(np.abs(element_ft(fam, 1, g) - exact)) <= 1e-14
    # positive modulus wherever it is representable
    assert np.all(np.abs(element_ft(fam, 1, np.linspace(-30, 30, 61))) > 0)


def test_gaussian_frame_unit_norm_and_overlap(sg):
    fam = BasisFamily("gaussian-frame", 5, a=1.0, w=1.0)
    G = gram_matrix(fam, sg)
    assert np.max(np.abs(np.diag(G) - 1)) <= 1e-12
    # neighbouring overlap of unit Gaussians at distance a: exp(-a^2 / 4 w^2)
    assert abs(G[0, 1] - np.exp(-0.25)) <= 1e-12
    assert np.max(np.abs(G - G.conj().T)) <= 1e-12
    assert not fam.is_orthonormal


def test_gaussian_frame_derivatives_by_quadrature():
    fam = BasisFamily("gaussian-frame", 2, a=1.5, w=0.8)
    # integral of e'' e over R equals -||e'||^2 = -1 / (2 w^2)
    d2 = quad(lambda y: fam.table(y, 2)[1, 0] * fam.table(y)[1, 0], -20, 20,
              epsabs=1e-13)[0]
    assert abs(d2 + 1 / (2 * 0.8**2)) <= 1e-10


def test_condition_report_hermite_n4():
    rep = condition_check(BasisFamily("hermite", 4), SpatialGrid(-12, 12, 1024),
                          FrequencyGrid(3.0, 1024))
    assert list(rep.condition_i_satisfied) == [True, False, False, False]
    assert rep.min_abs_ft[0] > 1e-2
    assert np.all(rep.min_abs_ft[1:] <= 1e-6)


def test_condition_report_gaussian_frame_band3():
    rep = condition_check(BasisFamily("gaussian-frame", 8), SpatialGrid(-12, 12, 1024),
                          FrequencyGrid(3.0, 1024))
    assert rep.condition_i_satisfied.all()
    # band edge value (4 pi)^{1/4} e^{-9/2}
    assert np.allclose(rep.min_abs_ft, (4 * np.pi) ** 0.25 * np.exp(-4.5), rtol=1e-12)
    d = rep.to_dict()
    assert d["condition_i_satisfied"] == [True] * 8 and d["N"] == 8


def test_condition_report_standard_band_underflows(sg, fg):
    """On [-12, 12] the Gaussian tails drop below eps, so no element qualifies."""
    rep = condition_check(BasisFamily("gaussian-frame", 4), sg, fg)
    assert not rep.condition_i_satisfied.any()


def test_root_between_samples_is_found():
    # e_1^ vanishes at gamma = 0, which is not a sample of an even-length grid
    fg = FrequencyGrid(3.0, 64)
    assert 0.0 not in fg.points
    assert min_abs_transform(BasisFamily("hermite", 2), 1, fg) <= 1e-6


def test_hermite_zeros_match_polynomial_roots():
    # e_3^ vanishes exactly at the roots of H_3
    roots = np.polynomial.hermite.hermroots([0, 0, 0, 1])
    assert np.max(np.abs(element_ft(BasisFamily("hermite", 4), 3, roots))) <= 1e-13


@pytest.mark.parametrize("bad", [-1, 4])
def test_index_out_of_range(bad):
    fam = BasisFamily("hermite", 4)
    with pytest.raises(IndexError):
        eval_element(fam, bad, 0.0)
    with pytest.raises(IndexError):
        element_ft(fam, bad, 0.0)


@pytest.mark.parametrize("kwargs", [dict(kind="legendre", order=3), dict(kind="hermite", order=0),
                                    dict(kind="gaussian-frame", order=3, a=0.0)])
def test_family_validation(kwargs):
    with pytest.raises(ValueError):
        BasisFamily(**kwargs)


def test_bad_derivative_order():
    with pytest.raises(ValueError):
        BasisFamily("hermite", 2).table([0.0], 3)


def test_field_wrappers(sg, fg):
    fam = BasisFamily("hermite", 3)
    f = fam.field(2, sg)
    assert isinstance(f, ComplexField) and f.grid == sg
    assert fam.ft_field(2, fg).grid == fg
