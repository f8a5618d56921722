import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levinterf.coherence import pattern_metrics
from levinterf.pattern import (GridError, NoFringesError, check_grid, decohered_density,
                               decohered_pdf, extrema_positions, max_step, moments_after_step4,
                               pattern_grid, required_span, seed_positions, unitary_density,
                               unitary_pdf)
from levinterf.protocol import FringePattern

DX = 3e-9


def _moments(x, f):
    m0 = np.trapezoid(f, x)
    m1 = np.trapezoid(x * f, x) / m0
    var = np.trapezoid((x - m1) ** 2 * f, x) / m0
    return m0, m1, var


def _direct_convolution(pat, x):
    """Gaussian-smeared Airy amplitude by plain trapezoid quadrature, squared."""
    from levinterf.airy import airy
    h = min(pat.sigma_c, pat.delta_x) / 40
    s = np.arange(-8 * pat.sigma_c, 8 * pat.sigma_c + h, h)
    g = np.exp(-s ** 2 / (4 * pat.sigma_c ** 2))
    amp = np.array([np.trapezoid(airy((xi - s) / pat.delta_x) * g, s) for xi in x])
    return amp ** 2


def test_grid_checks():
    pat = FringePattern(DX, 0.3 * DX)
    lo, hi = required_span(pat)
    ok = np.arange(lo, hi + max_step(pat), max_step(pat))
    check_grid(pat, ok)
    with pytest.raises(GridError, match="span"):
        check_grid(pat, ok[10:])
    with pytest.raises(GridError, match="spacing"):
        check_grid(pat, ok[::3])


@pytest.mark.parametrize("p_c,p_l", [(0.145, 0.0), (0.3, 0.2), (0.6, 0.4), (0.2, 0.05)])
def test_normalized_nonnegative_and_moments(p_c, p_l):
    pat = FringePattern(DX, p_c * DX, p_l * DX)
    x = pattern_grid(pat, tail=1e-14)
    fu = unitary_pdf(pat.with_blur(0.0), x)
    fd = decohered_pdf(pat, x)
    assert fu.min() >= 0 and fd.min() >= 0
    mu0, mu1, vu = _moments(x, fu)
    md0, md1, vd = _moments(x, fd)
    assert mu0 == pytest.approx(1, abs=1e-3)
    assert md0 == pytest.approx(1, abs=1e-3)
    mom = moments_after_step4(pat.with_blur(0.0), 1e-18, 1.0)
    assert mu1 == pytest.approx(mom["mean_x"], rel=1e-4)
    assert vu == pytest.approx(mom["var_x"], rel=1e-4)
    assert md1 == pytest.approx(mu1, rel=1e-6)
    assert (vd - vu) == pytest.approx(pat.sigma_lambda ** 2, abs=1e-6 * vd)


def test_zero_blur_identity():
    pat = FringePattern(DX, 0.2 * DX)
    x = pattern_grid(pat)
    assert np.array_equal(decohered_pdf(pat, x), unitary_pdf(pat, x))


def test_closed_form_matches_direct_convolution():
    pat = FringePattern(DX, 0.3 * DX)
    x = np.linspace(-12 * DX, 3 * DX, 61)
    ref = _direct_convolution(pat, x)
    got = unitary_density(pat, x)
    scale = got.max() / ref.max()
    assert np.max(np.abs(ref * scale - got)) <= 1e-6 * got.max()


def test_grid_and_pointwise_blur_agree():
    pat = FringePattern(DX, 0.25 * DX, 0.3 * DX)
    x = pattern_grid(pat)
    a = decohered_pdf(pat, x)
    b = decohered_density(pat, x[::97])
    assert np.max(np.abs(a[::97] - b)) <= 1e-4 * a.max()


def test_doubled_resolution_self_check():
    pat = FringePattern(DX, 0.145 * DX, 0.2 * DX)
    lo, hi = required_span(pat)
    h = max_step(pat)
    coarse = lo + h * np.arange(int((hi - lo) / h) + 2)
    fine = lo + h / 2 * np.arange(2 * (coarse.size - 1) + 1)
    c = decohered_pdf(pat, coarse)
    f = decohered_pdf(pat, fine)
    assert np.max(np.abs(c - f[::2])) <= 1e-4 * c.max()


def test_extrema_converge_to_airy_zeros():
    pat = FringePattern(DX, 0.01 * DX)
    ext = extrema_positions(pat)
    assert ext.x_min1 / DX == pytest.approx(-2.33811, abs=1e-3)
    assert ext.x_min2 / DX == pytest.approx(-4.08795, abs=1e-3)
    assert (ext.x_min1 - ext.x_min2) / DX == pytest.approx(1.75, abs=0.01)
    assert seed_positions(pat).x_max2 == pytest.approx(-3.248 * DX - pat.sigma_c ** 4 / DX ** 3)


def test_washed_out_pattern_raises():
    with pytest.raises(NoFringesError, match="no fringes"):
        extrema_positions(FringePattern(DX, 0.3 * DX, 1.5 * DX))


def test_gaussian_limit_moments():
    pat = FringePattern(1e-15, 2e-9, 1e-9)
    m = moments_after_step4(pat, 1e-18, 2 * math.pi * 1e4)
    assert abs(m["mean_x"]) < 1e-12 * pat.sigma_c
    assert m["second_x"] == pytest.approx((2e-9) ** 2 + (1e-9) ** 2, rel=1e-9)


def test_blur_adds_exactly_sigma_lambda_squared_to_analytic_variance():
    a = moments_after_step4(FringePattern(DX, 0.2 * DX), 1e-18, 1e4)
    b = moments_after_step4(FringePattern(DX, 0.2 * DX, 0.5 * DX), 1e-18, 1e4)
    assert b["var_x"] - a["var_x"] == pytest.approx((0.5 * DX) ** 2, rel=1e-9)


@settings(max_examples=15, deadline=None)
@given(st.floats(0.08, 0.6))
def test_visibility_strictly_decreasing_in_blur(p_c):
    vis = []
    for p_l in np.linspace(0.0, 0.5, 6):
        pat = FringePattern.canonical(p_c, float(p_l))
        try:
            vis.append(pattern_metrics(pat).visibility)
        except NoFringesError:
            break
    vis = [v for v in vis if v > 0]
    assert len(vis) >= 2
    assert all(b < a for a, b in zip(vis, vis[1:]))


def test_pdf_units_scale_with_length():
    a = FringePattern(1.0, 0.2)
    b = FringePattern(DX, 0.2 * DX)
    u = np.linspace(-5, 2, 9)
    assert np.allclose(unitary_density(b, u * DX) * DX, unitary_density(a, u), rtol=1e-10)
