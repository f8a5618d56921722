import math
from dataclasses import replace

import pytest

from conftest import case_params, splitting_params
from levinterf.pipeline import evaluate, mapped_params, omega2_readings, resolve_mapping_mode


def test_mode_resolution():
    p = case_params()
    assert resolve_mapping_mode(p, "asymptotic") == "asymptotic"
    assert resolve_mapping_mode(replace(p, tau4=0.0), "asymptotic") == "exact"


def test_readings_of_the_pulse_strength(particle50):
    r = omega2_readings(case_params(2.5), particle50)
    assert r["omega2sq_tau2_configured"] == pytest.approx((2 * math.pi * 2.5e3) ** 2 * 1e-5)
    assert r["omega2sq_tau2_exact"] == pytest.approx(2225.7, rel=1e-3)
    assert r["omega2sq_tau2_limit"] == pytest.approx(1 / 1.34e-3 + 1 / 0.66e-3)


def test_mapped_case_study(particle50):
    ev = evaluate(mapped_params(case_params(), particle50), particle50)
    assert ev.chirp.valid and ev.chirp.sigma_bc_over_dx < 1e-6
    assert ev.extrema is not None
    assert ev.warnings == ()
    assert ev.pattern_dict()["p_c"] == ev.pattern.p_c


def test_literal_pulse_is_flagged(particle50):
    ev = evaluate(case_params(2.5), particle50)
    assert any("pattern invalid" in w for w in ev.warnings)


def test_evaluation_is_deterministic(particle50):
    a = evaluate(splitting_params(), particle50, mapping="exact")
    b = evaluate(splitting_params(), particle50, mapping="exact")
    assert a.pattern == b.pattern and a.metrics == b.metrics


def test_g1_failure_becomes_warning(particle50):
    off = replace(mapped_params(case_params(), particle50), tau4=0.0)
    ev = evaluate(off, particle50, mapping="exact", with_g1=True)
    assert ev.extrema is not None
    assert ev.report.g1_peaks is None
    assert any("g1 unavailable" in w for w in ev.warnings)
