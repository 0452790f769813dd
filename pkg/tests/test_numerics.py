import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kernelsolve.numerics import (
    ComplexField, FrequencyGrid, GridMismatchError, QuadratureRule, SpatialGrid,
    energy_leak, forward_ft, inner_product, inverse_ft, l2_norm, pairwise_sum,
    trapezoid_weights,
)



def test_gaussian_transform_closed_form(gaussian, fg):
    F = forward_ft(gaussian, fg)
    exact = np.sqrt(2 * np.pi) * np.exp(-fg.points**2 / 2)
    assert np.max(np.abs(F.samples - exact)) <= 1e-8


@pytest.mark.parametrize("width", [0.5, 1.0, 2.0])
def test_scaled_gaussian_transform(sg, fg, width):
    f = ComplexField(np.exp(-sg.points**2 / (2 * width**2)), sg)
    exact = np.sqrt(2 * np.pi) * width * np.exp(-(width * fg.points) ** 2 / 2)
    assert np.max(np.abs(forward_ft(f, fg).samples - exact)) <= 1e-8


def test_shift_theorem(sg, fg):
    f = ComplexField(np.exp(-(sg.points - 1.5) ** 2 / 2), sg)
    exact = np.sqrt(2 * np.pi) * np.exp(-fg.points**2 / 2 - 1.5j * fg.points)
    assert np.max(np.abs(forward_ft(f, fg).samples - exact)) <= 1e-8


def test_zero_field_transforms_to_zero(sg, fg):
    F = forward_ft(ComplexField(np.zeros(sg.n), sg), fg)
    assert not np.any(F.samples)


def test_round_trip(gaussian, sg, fg):
    back = inverse_ft(forward_ft(gaussian, fg), sg)
    assert np.max(np.abs(back.samples - gaussian.samples)) <= 1e-8


def test_parseval(sg, fg):
    x = sg.points
    f = ComplexField(np.exp(-(x - 1) ** 2 / 2 + 0.7j * x), sg)
    g = ComplexField((x + 0.3j) * np.exp(-x**2 / 3), sg)
    lhs = inner_product(f, g)
    rhs = inner_product(forward_ft(f, fg), forward_ft(g, fg))
    assert abs(lhs - rhs) <= 1e-8 * max(1.0, abs(lhs))
    assert abs(l2_norm(f) ** 2 - np.sqrt(np.pi)) <= 1e-10


def test_inner_product_conjugates_second_slot(sg):
    x = sg.points
    f = ComplexField(np.exp(-x**2 / 2), sg)
    g = ComplexField(1j * np.exp(-x**2 / 2), sg)
    assert abs(inner_product(f, g) - (-1j) * np.sqrt(np.pi)) <= 1e-12
    assert abs(inner_product(g, f) - 1j * np.sqrt(np.pi)) <= 1e-12


def test_inner_product_rejects_mixed_domains(gaussian, fg):
    with pytest.raises(GridMismatchError):
        inner_product(gaussian, forward_ft(gaussian, fg))


def test_inner_product_domain_check(gaussian):
    with pytest.raises(GridMismatchError):
        inner_product(gaussian, gaussian, domain="frequency")


@given(a=st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
       b=st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
       shift=st.floats(-3, 3))
@settings(max_examples=20, deadline=None)
def test_transform_linearity(a, b, shift):
    sg, fg = SpatialGrid(-12, 12, 1024), FrequencyGrid(12, 1024)
    x = sg.points
    f = ComplexField(np.exp(-x**2 / 2), sg)
    g = ComplexField(np.exp(-(x - shift) ** 2), sg)
    lhs = forward_ft(ComplexField(a * f.samples + b * g.samples, sg), fg).samples
    rhs = a * forward_ft(f, fg).samples + b * forward_ft(g, fg).samples
    assert np.max(np.abs(lhs - rhs)) <= 1e-10 * max(1.0, abs(a) + abs(b))


@pytest.mark.parametrize("shift,k0", [(0.0, 0.0), (2.0, 1.0), (-3.0, -2.5)])
def test_fast_path_matches_direct(sg, fg, shift, k0):
    f = ComplexField(np.exp(-(sg.points - shift) ** 2 / 2 + 1j * k0 * sg.points), sg)
    F = forward_ft(f, fg)
    assert np.max(np.abs(forward_ft(f, fg, fast=True).samples - F.samples)) <= 1e-10
    assert np.max(np.abs(inverse_ft(F, sg, fast=True).samples
                         - inverse_ft(F, sg).samples)) <= 1e-10


def test_transforms_are_deterministic(sg, fg):
    rng = np.random.default_rng(7)
    f = ComplexField(rng.standard_normal(sg.n) * np.exp(-sg.points**2 / 2), sg)
    a, b = forward_ft(f, fg), forward_ft(f, fg)
    assert a.samples.tobytes() == b.samples.tobytes()
    assert inner_product(f, f) == inner_product(f, f)


def test_pairwise_sum_matches_and_is_stable():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((5, 1001))
    assert np.allclose(pairwise_sum(a), a.sum(axis=-1), rtol=1e-13)
    assert np.allclose(pairwise_sum(a, axis=0), a.sum(axis=0), rtol=1e-13)
    assert pairwise_sum(a).tobytes() == pairwise_sum(a.copy()).tobytes()
    # pairwise error stays far below naive accumulation on a long constant run
    v = np.full(10**6, 0.1)
    assert abs(pairwise_sum(v) - 1e5) < 1e-8


def test_energy_leak_small_for_gaussian(gaussian, fg):
    assert energy_leak(gaussian, fg) <= 1e-10


def test_energy_leak_detects_narrow_band(sg):
    f = ComplexField(np.exp(-sg.points**2 / 2), sg)
    assert energy_leak(f, FrequencyGrid(1.0, 256)) > 0.1


def test_trapezoid_weights():
    w = trapezoid_weights(5, 0.5)
    assert np.allclose(w, [0.25, 0.5, 0.5, 0.5, 0.25])


@pytest.mark.parametrize("args", [(1.0, 1.0, 16), (2.0, -1.0, 16), (-1.0, 1.0, 4)])
def test_spatial_grid_validation(args):
    with pytest.raises(ValueError):
        SpatialGrid(*args)


@pytest.mark.parametrize("args", [(0.0, 64), (-1.0, 64), (3.0, 4)])
def test_frequency_grid_validation(args):
    with pytest.raises(ValueError):
        FrequencyGrid(*args)


def test_grids_endpoints():
    sg = SpatialGrid(-12, 12, 1024)
    assert sg.points[0] == -12 and sg.points[-1] == 12
    assert sg.spacing == pytest.approx(24 / 1023)
    fg = FrequencyGrid(3, 9)
    assert np.allclose(fg.points, np.linspace(-3, 3, 9))


def test_field_rejects_non_finite(sg):
    bad = np.zeros(sg.n, complex)
    bad[3] = np.nan
    with pytest.raises(ValueError):
        ComplexField(bad, sg)
    assert ComplexField(bad, sg, {"nonfinite_allowed": True}).samples.shape == (sg.n,)


def test_field_rejects_length_mismatch(sg):
    with pytest.raises(ValueError):
        ComplexField(np.zeros(sg.n - 1), sg)


def test_field_from_function(sg):
    f = ComplexField.from_function(lambda x: x**2, sg)
    assert f.domain == "spatial"
    assert np.allclose(f.samples.real, sg.points**2)


def test_transform_input_checks(gaussian, sg, fg):
    with pytest.raises(GridMismatchError):
        forward_ft(forward_ft(gaussian, fg), fg)
    with pytest.raises(GridMismatchError):
        inverse_ft(gaussian, sg)


def test_gauss_hermite_rule_integrates_gaussian_moments():
    x, w, _ = QuadratureRule("gauss-hermite", order=40).nodes_weights()
    f = np.exp(-x**2) * x**4
    assert abs(np.sum(w * f) - 0.75 * np.sqrt(np.pi)) <= 1e-12


def test_trapezoid_rule_panels(sg):
    rule = QuadratureRule("trapezoid", sg)
    x, w, panel = rule.nodes_weights((-1.0, 1.0))
    assert abs(np.sum(w) - 24.0) <= 1e-12
    assert set(np.unique(panel)) == {0, 1, 2}
    # the box indicator integrates exactly once the jump sits on a panel edge
    ind = ((x > -1) & (x < 1)) | ((np.abs(x) == 1) & (panel == 1))
    assert abs(np.sum(w * ind) - 2.0) <= 1e-12
