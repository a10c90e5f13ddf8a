import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from expburgers.spectral_core import (
    Grid,
    SpectralField,
    dealiased_product,
    forward_transform,
    inverse_transform,
    nonlinear_term,
)
from oracles import brute_convolution

PROPERTY = settings(max_examples=1000, deadline=None)


def test_grid_defaults():
    g = Grid()
    assert g.n_collocation == 64
    assert g.k_max == 21
    assert g.retained.sum() == 2 * 21 + 1
    assert g.index(-1) == 63
    with pytest.raises(ValueError):
        Grid(63)


def test_transform_of_sine():
    g = Grid(16)
    u = forward_transform(-np.sin(g.points), g)
    assert u.reality_flag
    assert u[1] == pytest.approx(0.5j, abs=1e-15)
    assert u[-1] == pytest.approx(-0.5j, abs=1e-15)
    others = [u[k] for k in range(-7, 8) if abs(k) != 1]
    assert max(map(abs, others)) < 1e-15


def test_transform_of_constant():
    g = Grid(8)
    u = forward_transform(np.full(8, 3.0), g)
    assert u[0] == pytest.approx(3.0)
    assert np.allclose(inverse_transform(u), 3.0)


def test_round_trip():
    g = Grid(32)
    x = np.random.default_rng(0).standard_normal(32)
    assert np.allclose(inverse_transform(forward_transform(x, g)), x, atol=1e-14)


def test_nonlinear_term_of_sine():
    # -u u_x for u = sin x is -sin(2x)/2, i.e. uhat(+-2) = +-i/4
    g = Grid(32)
    u = forward_transform(np.sin(g.points), g)
    n = nonlinear_term(u)
    assert n[2] == pytest.approx(0.25j, abs=1e-15)
    assert n[-2] == pytest.approx(-0.25j, abs=1e-15)


def test_product_rejects_unknown_method():
    g = Grid(8)
    z = SpectralField.zeros(g)
    with pytest.raises(ValueError):
        dealiased_product(z, z, method="spline")


def _random_field(draw, g, hermitian=False, half_space=False):
    km = g.k_max
    vals = st.floats(-1, 1, allow_nan=False)
    modes = {}
    for k in range(-km, km + 1):
        if half_space and k <= 0:
            continue
        if hermitian and k < 0:
            continue
        re, im = draw(vals), draw(vals)
        if hermitian and k == 0:
            im = 0.0
        modes[k] = complex(re, im)
    if hermitian:
        for k in range(1, km + 1):
            modes[-k] = modes[k].conjugate()
    return modes


@st.composite
def field_pairs(draw, **kw):
    n = draw(st.sampled_from([8, 10, 12, 16, 24, 32]))
    g = Grid(n)
    return g, _random_field(draw, g, **kw), _random_field(draw, g, **kw)


@PROPERTY
@given(field_pairs(), st.sampled_from(["fft", "direct"]))
def test_convolution_matches_brute_force(data, method):
    g, a, b = data
    fa, fb = SpectralField.from_modes(g, a), SpectralField.from_modes(g, b)
    got = dealiased_product(fa, fb, method=method)
    want = brute_convolution(a, b, g.k_max)
    for k in range(-g.k_max, g.k_max + 1):
        assert abs(got[k] - want[k]) <= 1e-13 * (1 + abs(want[k]))
    # nothing outside the retained band
    assert not np.any(got.coeffs[~g.retained])


@PROPERTY
@given(field_pairs(hermitian=True), st.sampled_from(["fft", "direct"]))
def test_hermitian_symmetry_preserved(data, method):
    g, a, b = data
    fa = SpectralField.from_modes(g, a, reality_flag=True)
    fb = SpectralField.from_modes(g, b, reality_flag=True)
    for out in (dealiased_product(fa, fb, method=method), nonlinear_term(fa, method=method)):
        for k in range(g.k_max + 1):
            assert abs(out[-k] - out[k].conjugate()) <= 1e-14 * (1 + abs(out[k]))


@PROPERTY
@given(field_pairs(half_space=True), st.sampled_from(["fft", "direct"]))
def test_half_space_support_preserved(data, method):
    g, a, b = data
    fa, fb = SpectralField.from_modes(g, a), SpectralField.from_modes(g, b)
    assert fa.is_half_space()
    out = dealiased_product(fa, fb, method=method)
    assert out.is_half_space()
    assert nonlinear_term(fa, method=method).is_half_space()


def test_methods_agree_on_smooth_field():
    g = Grid(64)
    u = forward_transform(np.exp(np.cos(g.points)), g)
    u = u.with_coeffs(np.where(g.retained, u.coeffs, 0))
    a = dealiased_product(u, u, method="fft").coeffs
    b = dealiased_product(u, u, method="direct").coeffs
    assert np.max(np.abs(a - b)) < 1e-15 * math.e**2 * 10
