import math
import warnings
from dataclasses import replace

import pytest

from conftest import case_params
from levinterf.core import HBAR, particle_from_radius
from levinterf.protocol import (CubicPulse, FringePattern, ProtocolParams, ProtocolWarning,
                                b_c_residual, fringe_pattern, fringe_ratio, mapping_condition_limit,
                                mapping_condition_omega2sq_tau2, mapping_length,
                                pattern_no_inversion, pattern_with_inversion,
                                pulse_for_mapping, sigma_c_with_inversion, state_after_step1)

P = particle_from_radius(50e-9)
LAM = 1550e-9


def test_params_validation():
    base = case_params()
    with pytest.raises(ValueError):
        replace(base, phi2=math.pi / 4)
    with pytest.raises(ValueError):
        replace(base, tau3=-1.0)
    with pytest.raises(ValueError):
        replace(base, nbar=-0.5)


def test_regime_warnings():
    base = case_params()
    assert base.regime_warnings() == []
    short = replace(base, tau1=1e-6)
    assert any("omega0*tau1" in w for w in short.regime_warnings())
    wide = replace(base, phi2=0.2 * math.pi)
    assert any("pi/8" in w for w in wide.regime_warnings())


def test_pattern_ratios_exact():
    pat = FringePattern(2e-9, 3e-10, 5e-10)
    assert pat.p_c == 3e-10 / 2e-9
    assert pat.p_lambda == 5e-10 / 2e-9
    with pytest.raises(ValueError):
        FringePattern(0.0, 1.0)


def test_pulse_cubic_term_vanishes_only_at_zero_angle():
    pulse = CubicPulse.from_standing_wave(1e4, 0.05 * math.pi, LAM)
    assert pulse.inv_l > 0
    flat = CubicPulse(1e8, 0.0, 2 * math.pi / LAM)
    with pytest.raises(ValueError, match="no cubic term"):
        fringe_ratio(1e-8, P.mass, flat, 1e-5)


def test_fringe_ratio_matches_length_scales():
    params = pulse_for_mapping(case_params(tau4=0.0), P)
    st = state_after_step1(params, P.mass)
    sx = math.sqrt(st.var_x)
    pulse = CubicPulse.from_params(params, LAM)
    pat = fringe_pattern(sx, P.mass, pulse, params.tau2, params.tau3 / P.mass)
    assert fringe_ratio(sx, P.mass, pulse, params.tau2) == pytest.approx(
        pat.delta_x / pat.sigma_c, rel=1e-10)


def test_no_inversion_shape_invariant_under_tau3():
    params = case_params()
    st = state_after_step1(params, P.mass)
    sx = math.sqrt(st.var_x)
    pulse = CubicPulse.from_params(params, LAM)
    a = pattern_no_inversion(sx, P.mass, pulse, 1e-5, 0.3, 2e-27, 1e-27)
    b = pattern_no_inversion(sx, P.mass, pulse, 1e-5, 3.7, 2e-27, 1e-27)
    assert b.p_c == pytest.approx(a.p_c, rel=1e-12)
    assert b.p_lambda == pytest.approx(a.p_lambda, rel=1e-12)
    assert b.delta_x / a.delta_x == pytest.approx(3.7 / 0.3, rel=1e-12)


def test_sigma_c_closed_form_matches_asymptotic_map():
    sx, t3, w4, t4 = 1.1e-8, 0.66e-3, 2 * math.pi * 1e4, 0.087e-3
    pulse = CubicPulse.from_standing_wave(1.5e4, 0.05 * math.pi, LAM)
    pat = pattern_with_inversion(sx, P.mass, pulse, 1e-5, t3, w4, t4)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ProtocolWarning)
        sc = sigma_c_with_inversion(sx, P.mass, t3, w4, t4)
    assert sc == pytest.approx(pat.sigma_c, rel=1e-12)
    with pytest.warns(ProtocolWarning):
        sigma_c_with_inversion(sx, P.mass, t3, w4, 1e-5)


def test_mapping_modes_converge_for_deep_inversion():
    w4 = 2 * math.pi * 1e4
    t4 = 10 / w4
    ex = mapping_length(P.mass, 1e-3, w4, t4, "exact")
    asy = mapping_length(P.mass, 1e-3, w4, t4, "asymptotic")
    assert asy == pytest.approx(ex, rel=1e-8)
    assert mapping_length(P.mass, 1e-3, w4, 0.0, "exact") == pytest.approx(1e-3 / P.mass)
    with pytest.raises(ValueError):
        mapping_length(P.mass, 1e-3, w4, t4, "bogus")


def test_mapping_condition_reduces_to_limit():
    params = case_params(tau4=0.0)
    st = state_after_step1(params, P.mass)
    exact = mapping_condition_omega2sq_tau2(params.tau1, params.tau3, params.omega4, 0.0, st,
                                            P.mass)
    assert exact == pytest.approx(mapping_condition_limit(params.tau1, params.tau3), rel=1e-5)
    with pytest.raises(ValueError):
        mapping_condition_limit(0.0, 1.0)


def test_b_c_vanishes_on_condition_and_flips_sign():
    params = pulse_for_mapping(case_params(), P)
    st = state_after_step1(params, P.mass)
    on = b_c_residual(params, st, CubicPulse.from_params(params, LAM), P.mass)
    scale = P.mass / (2 * HBAR) * params.omega2_sq * params.tau2
    assert abs(on.b_c) <= 1e-12 * scale
    assert on.valid
    up = replace(params, omega_p=params.omega_p * math.sqrt(1.1))
    down = replace(params, omega_p=params.omega_p * math.sqrt(0.9))
    r_up = b_c_residual(up, st, CubicPulse.from_params(up, LAM), P.mass)
    r_down = b_c_residual(down, st, CubicPulse.from_params(down, LAM), P.mass)
    assert math.isfinite(r_up.sigma_bc_over_dx) and r_up.sigma_bc_over_dx > 0
    assert r_up.b_c < 0 < r_down.b_c


def test_literal_table_pulse_flags_invalid_chirp():
    params = case_params(2.5)
    st = state_after_step1(params, P.mass)
    res = b_c_residual(params, st, CubicPulse.from_params(params, LAM), P.mass)
    assert not res.valid
