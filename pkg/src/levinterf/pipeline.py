"""End-to-end evaluation of one protocol parameter set."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .coherence import (CoherenceReport, PatternMetrics, PulsedState, QuadratureError,
                        certified_lower_bound, coherence_length, g1_numeric, pattern_metrics,
                        peak_mass)
from .core import HBAR, GaussianState, Particle
from .decoherence import BlurringBudget, LocalizationRates, blurring_budget, protocol_rates
from .pattern import Extrema, NoFringesError, extrema_positions
from .protocol import (ChirpResidual, CubicPulse, FringePattern, ProtocolParams, b_c_residual,
                       mapping_condition_limit, mapping_condition_omega2sq_tau2,
                       mapping_length, state_after_step1)


@dataclass(frozen=True)
class Evaluation:
    params: ProtocolParams
    particle: Particle
    rates: LocalizationRates
    state1: GaussianState
    pulse: CubicPulse
    chirp: ChirpResidual
    pattern: FringePattern
    budget: BlurringBudget
    extrema: Extrema | None
    metrics: PatternMetrics
    report: CoherenceReport
    mapping_mode: str
    peak_mass: float | None = None
    warnings: tuple = field(default=())

    @property
    def sigma_x1(self) -> float:
        return math.sqrt(self.state1.var_x)

    def pattern_dict(self) -> dict:
        p = self.pattern
        d = dict(delta_x=p.delta_x, sigma_c=p.sigma_c, sigma_lambda=p.sigma_lambda,
                 p_c=p.p_c, p_lambda=p.p_lambda)
        if self.extrema is not None:
            d.update(self.extrema.as_dict())
        return d


def resolve_mapping_mode(params: ProtocolParams, mode: str) -> str:
    if mode == "asymptotic" and (params.omega4 == 0 or params.tau4 == 0):
        return "exact"
    return mode


def evaluate(params: ProtocolParams, particle: Particle, lambda_bb: float = 0.0,
             mapping: str = "asymptotic", m_sigma: float = 5.0, with_g1: bool = False,
             with_peak_mass: bool = False, wavelength: float | None = None) -> Evaluation:
    lam = wavelength or particle.material.wavelength
    mode = resolve_mapping_mode(params, mapping)
    m = particle.mass
    rates = protocol_rates(params, particle, lambda_bb, lam)
    state1 = state_after_step1(params, m, rates.lambda1)
    sx = math.sqrt(state1.var_x)
    pulse = CubicPulse.from_params(params, lam)
    chirp = b_c_residual(params, state1, pulse, m)
    budget = blurring_budget(params, particle, rates, sx, params.nbar, mode)
    b_map = mapping_length(m, params.tau3, params.omega4, params.tau4, mode)
    a3 = (3 * pulse.airy_rate(m, params.tau2)) ** (1 / 3)
    pattern = FringePattern(HBAR * b_map * a3, HBAR * b_map / (2 * sx), budget.sigma_lambda)
    try:
        ext = extrema_positions(pattern)
    except NoFringesError:
        ext = None
    metrics = pattern_metrics(pattern, ext, m_sigma)
    g1 = None
    warns = list(params.regime_warnings())
    if with_g1 and ext is not None:
        ps = PulsedState(state1, m, pulse, params.tau2, budget.sigma2)
        try:
            g1 = g1_numeric(ext.x_max1, ext.x_max2, ps, params.tau3, params.omega4, params.tau4)
        except QuadratureError as exc:
            warns.append(f"g1 unavailable: {exc}")
    report = CoherenceReport(coherence_length(state1),
                             certified_lower_bound(sx, pattern.sigma_c, pattern.sigma_lambda), g1)
    pm = peak_mass(pattern, ext) if (with_peak_mass and ext is not None) else None
    if not chirp.valid:
        warns.append(f"sigma_bc/delta_x = {chirp.sigma_bc_over_dx:.3g} >= 1: pattern invalid")
    if mode == "asymptotic" and params.omega4 * params.tau4 < 2:
        warns.append("omega4*tau4 < 2: asymptotic composition outside validity")
    return Evaluation(params, particle, rates, state1, pulse, chirp, pattern, budget, ext,
                      metrics, report, mode, pm, tuple(warns))


def mapped_params(params: ProtocolParams, particle: Particle, lambda1: float = 0.0,
                  form: str = "exact") -> ProtocolParams:
    """Set omega_p so that the chosen mapping condition holds."""
    state = state_after_step1(params, particle.mass, lambda1)
    w2t = mapping_condition_omega2sq_tau2(params.tau1, params.tau3, params.omega4, params.tau4,
                                          state, particle.mass, form)
    return replace(params, omega_p=ProtocolParams.omega_p_for(w2t / params.tau2, params.phi2))


def omega2_readings(params: ProtocolParams, particle: Particle, lambda1: float = 0.0) -> dict:
    """omega2^2 tau2 under the exact and limit mapping conditions and as configured."""
    state = state_after_step1(params, particle.mass, lambda1)
    exact = mapping_condition_omega2sq_tau2(params.tau1, params.tau3, params.omega4, params.tau4,
                                            state, particle.mass)
    return dict(omega2sq_tau2_configured=params.omega2_sq * params.tau2,
                omega2sq_tau2_exact=exact,
                omega2sq_tau2_limit=mapping_condition_limit(params.tau1, params.tau3))
