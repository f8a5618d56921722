import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import case_params
from levinterf.core import HBAR, particle_from_radius
from levinterf.decoherence import (LocalizationRates, beta_x, beta_y, beta_z, blurring_budget,
                                   compose_sigma_lambda, protocol_rates,
                                   purity_after_free_fall, recoil_rate, step4_recoil)
from levinterf.protocol import pulse_for_mapping, state_after_step1

P = particle_from_radius(50e-9)
K = 2 * math.pi / 1550e-9


def test_beta_sum_for_random_angles():
    rng = np.random.default_rng(11)
    for phi in rng.uniform(-math.pi, math.pi, 100):
        total = beta_x(phi, K) + beta_y(phi, K) + beta_z(phi, K)
        assert abs(total - K ** 2) <= 1e-12 * K ** 2


def test_beta_split_at_zero_angle():
    split = [b(0.0, K) / K ** 2 for b in (beta_x, beta_y, beta_z)]
    assert split == pytest.approx([0.4, 0.2, 0.4], rel=1e-14)


def test_step4_recoil_relations():
    w = 2 * math.pi * 1e4
    assert step4_recoil(w, P) == recoil_rate(math.pi / 2, w, P)
    assert step4_recoil(w, P) / recoil_rate(0.0, w, P) == pytest.approx(2.5, rel=1e-14)
    val = step4_recoil(w, P)
    assert math.isfinite(val) and val > 0
    with pytest.raises(ValueError):
        step4_recoil(0.0, P)


def test_rates_reject_negative():
    with pytest.raises(ValueError):
        LocalizationRates(lambda2=-1.0)


def test_protocol_rates_assignment():
    params = case_params()
    r = protocol_rates(params, P, lambda_bb=3e14)
    assert r.lambda1 == r.lambda3 == 3e14
    assert r.lambda2 == recoil_rate(params.phi2, params.omega_p, P)
    assert r.lambda4 == step4_recoil(params.omega4, P)


@pytest.mark.parametrize("mode", ["asymptotic", "exact"])
def test_noise_free_ground_state_has_no_blur(mode):
    params = replace(case_params(), nbar=0.0)
    b = blurring_budget(params, P, LocalizationRates(), mode=mode)
    assert b.sigma_lambda == 0.0


def test_thermal_only_term():
    params = pulse_for_mapping(case_params(), P)
    b = blurring_budget(params, P, LocalizationRates(), mode="exact")
    sx = math.sqrt(state_after_step1(params, P.mass).var_x)
    assert b.sigma01 ** 2 == pytest.approx(0.75 * HBAR ** 2 / sx ** 2, rel=1e-12)


@pytest.mark.parametrize("mode", ["asymptotic", "exact"])
def test_budget_recomposes_exactly(mode):
    params = pulse_for_mapping(case_params(), P)
    b = blurring_budget(params, P, protocol_rates(params, P, 2e14), mode=mode)
    assert b.compose() == pytest.approx(b.sigma_lambda, rel=1e-12)
    d = b.as_dict()
    assert d["mapping_mode"] == mode and d["sigma_lambda"] == b.sigma_lambda


@pytest.mark.parametrize("mode", ["asymptotic", "exact"])
def test_blur_monotone_in_every_source(mode):
    params = pulse_for_mapping(case_params(), P)
    base_rates = LocalizationRates(1e14, 1e15, 1e14, 1e15)
    ref = blurring_budget(params, P, base_rates, mode=mode).sigma_lambda
    for name in ("lambda1", "lambda2", "lambda3", "lambda4"):
        bumped = replace(base_rates, **{name: getattr(base_rates, name) * 3})
        assert blurring_budget(params, P, bumped, mode=mode).sigma_lambda >= ref
    assert blurring_budget(replace(params, nbar=1.0), P, base_rates,
                           mode=mode).sigma_lambda >= ref
    assert blurring_budget(replace(params, tau4=2 * params.tau4), P, base_rates,
                           mode=mode).sigma_lambda >= ref


def test_asymptotic_and_exact_agree_for_deep_inversion():
    params = replace(pulse_for_mapping(case_params(), P), tau4=1.2e-3)
    rates = protocol_rates(params, P)
    a = blurring_budget(params, P, rates, mode="asymptotic").sigma_lambda
    e = blurring_budget(params, P, rates, mode="exact").sigma_lambda
    assert a == pytest.approx(e, rel=1e-3)


def test_compose_rejects_unknown_mode():
    with pytest.raises(ValueError):
        compose_sigma_lambda(1, 1, 1, 1, 0, 1, 1, 1, 1, mode="bogus")


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 100), st.floats(0, 1e20), st.floats(0, 1), st.floats(1e-12, 1e-6))
def test_purity_in_unit_interval(nbar, lam, tau1, sx):
    p = purity_after_free_fall(nbar, lam, tau1, sx)
    assert 0 < p <= 1
