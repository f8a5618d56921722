"""Quality contour in shape space and the two protocol optimizations."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq, minimize_scalar

from .coherence import PatternMetrics, pattern_metrics
from .core import HBAR, Particle, particle_from_radius, Material, SILICA
from .decoherence import blurring_budget, protocol_rates
from .environment import (BlackBodyModel, absorbed_power, bb_localization_rate,
                          duty_cycle_temperature)
from .pipeline import Evaluation, evaluate, mapped_params
from .protocol import CubicPulse, FringePattern, ProtocolParams, mapping_length, state_after_step1

TWO_PI = 2 * math.pi
PEAK_DISTANCE_FACTOR = 2.23
MIN_SPACING_FACTOR = 1.75


def quality(p_c: float, p_lambda: float) -> float:
    return pattern_metrics(FringePattern.canonical(p_c, p_lambda)).quality


class InfeasibleError(RuntimeError):
    pass


@dataclass(frozen=True)
class QualityContour:
    q_target: float
    samples: tuple
    omitted: tuple = ()

    def __post_init__(self):
        pcs = [s[0] for s in self.samples]
        if any(b <= a for a, b in zip(pcs, pcs[1:])):
            raise ValueError("contour samples must be strictly increasing in p_c")

    @property
    def band(self) -> tuple[float, float]:
        return self.samples[0][0], self.samples[-1][0]

    def _interp(self):
        pc = np.log([s[0] for s in self.samples])
        pl = np.log([s[1] for s in self.samples])
        return PchipInterpolator(pc, pl, extrapolate=False)

    def p_lambda_at(self, p_c):
        """Interpolated contour value; NaN outside the sampled band."""
        f = self._interp()
        with np.errstate(divide="ignore"):
            return np.exp(f(np.log(np.asarray(p_c, dtype=float))))


def _solve_p_lambda(p_c: float, q_target: float, xtol: float = 1e-10) -> float | None:
    f = lambda pl: quality(p_c, pl) - q_target  # noqa: E731
    if f(0.0) <= 0:
        return None
    lo, hi = 0.0, 0.05
    while f(hi) > 0:
        lo, hi = hi, hi * 2
        if hi > 20:
            return None
    return brentq(f, lo, hi, xtol=xtol, rtol=1e-12)


def check_monotone(p_c: float, p_lambdas) -> bool:
    qs = [quality(p_c, pl) for pl in p_lambdas]
    return all(b < a or (a == 0 and b == 0) for a, b in zip(qs, qs[1:]))


def quality_contour(q_target: float, p_c_grid) -> QualityContour:
    if not q_target > 0:
        raise ValueError("q_target must be positive")
    samples, omitted = [], []
    for pc in sorted(float(p) for p in p_c_grid):
        pl = _solve_p_lambda(pc, q_target)
        if pl is None or pl <= 0:
            omitted.append((pc, "q below target even without blur"))
        elif not check_monotone(pc, np.linspace(0.0, 1.5 * pl, 6)):
            omitted.append((pc, "q not monotone in p_lambda"))
        else:
            samples.append((pc, pl))
    if not samples:
        raise InfeasibleError(f"no p_c in the grid reaches q = {q_target}")
    return QualityContour(q_target, tuple(samples), tuple(omitted))


DEFAULT_PC_GRID = tuple(np.geomspace(0.03, 1.2, 41))


@lru_cache(maxsize=16)
def default_contour(q_target: float) -> QualityContour:
    return quality_contour(q_target, DEFAULT_PC_GRID)


# -- shape model shared by both optimizations ---------------------------------

@dataclass(frozen=True)
class Scenario:
    """Fixed inputs of an optimization: particle, trap, pulse and environment."""

    particle: Particle
    tau_f: float
    omega0: float = TWO_PI * 100e3
    omega4: float = TWO_PI * 10e3
    nbar: float = 0.5
    tau0: float = 2e-3
    tau2: float = 10e-6
    lambda_bb: float = 0.0
    inverted: bool = True

    def params(self, tau1: float, phi2: float, tau4: float = 0.0) -> ProtocolParams:
        base = ProtocolParams(self.omega0, self.nbar, self.tau0, tau1, phi2, 1.0, self.tau2,
                              self.tau_f - tau1, self.omega4 if self.inverted else 0.0,
                              tau4 if self.inverted else 0.0)
        if self.inverted and tau4 == 0.0:
            # scan stage: tau4 -> infinity limit of the mapping condition
            st = state_after_step1(base, self.particle.mass, self.lambda_bb)
            w2t = st.cov_xp / (self.particle.mass * st.var_x) + self.omega4 / (self.omega4 * base.tau3 + 1)
            return replace(base, omega_p=ProtocolParams.omega_p_for(w2t / self.tau2, phi2))
        return mapped_params(base, self.particle, self.lambda_bb)

    def shape(self, tau1: float, phi2: float) -> tuple[FringePattern, float]:
        """Pattern (at tau4 = 0 scaling) and sigma_x(tau1)."""
        p = self.params(tau1, phi2)
        m = self.particle.mass
        rates = protocol_rates(p, self.particle, self.lambda_bb)
        st = state_after_step1(p, m, rates.lambda1)
        sx = math.sqrt(st.var_x)
        mode = "asymptotic" if self.inverted else "exact"
        budget = blurring_budget(p, self.particle, rates, sx, p.nbar, mode)
        b = mapping_length(m, p.tau3, p.omega4, p.tau4, mode)
        pulse = CubicPulse.from_params(p, self.particle.material.wavelength)
        a3 = (3 * pulse.airy_rate(m, p.tau2)) ** (1 / 3)
        return FringePattern(HBAR * b * a3, HBAR * b / (2 * sx), budget.sigma_lambda), sx

    def objective(self, pattern: FringePattern, sigma_x1: float) -> float:
        if self.inverted:
            return 2 * sigma_x1 * pattern.sigma_c / pattern.sigma_lambda
        return PEAK_DISTANCE_FACTOR * pattern.delta_x


@dataclass(frozen=True)
class OptimizationResult:
    feasible: bool
    tau1: float = math.nan
    tau3: float = math.nan
    phi2: float = math.nan
    tau4: float = math.nan
    omega2: float = math.nan
    objective: float = math.nan
    pattern: FringePattern | None = None
    metrics: PatternMetrics | None = None
    g1: float | None = None
    sigma_bc_over_dx: float = math.nan
    T_i: float | None = None
    conditional_flags: tuple = ()
    constraints: dict = field(default_factory=dict)
    reason: str = ""
    evaluation: Evaluation | None = field(default=None, repr=False, compare=False)

    def as_dict(self) -> dict:
        d = dict(feasible=self.feasible, tau1=self.tau1, tau3=self.tau3, phi2=self.phi2,
                 tau4=self.tau4, omega2=self.omega2, objective=self.objective, g1=self.g1,
                 sigma_bc_over_dx=self.sigma_bc_over_dx, T_i=self.T_i, reason=self.reason,
                 conditional_flags=list(self.conditional_flags))
        if self.pattern is not None:
            d.update(delta_x=self.pattern.delta_x, sigma_c=self.pattern.sigma_c,
                     sigma_lambda=self.pattern.sigma_lambda, p_c=self.pattern.p_c,
                     p_lambda=self.pattern.p_lambda)
        if self.metrics is not None:
            d.update(self.metrics.as_dict())
        d.update(self.constraints)
        return d


def _phi_roots(sc: Scenario, contour: QualityContour, tau1: float, phis: np.ndarray):
    def resid(phi):
        pat, _ = sc.shape(tau1, phi)
        target = contour.p_lambda_at(pat.p_c)
        if not np.isfinite(target):
            return math.nan
        return math.log(pat.p_lambda / float(target))

    vals = np.array([resid(ph) for ph in phis])
    roots = []
    for i in range(len(phis) - 1):
        a, b = vals[i], vals[i + 1]
        if np.isfinite(a) and np.isfinite(b) and a * b < 0:
            roots.append(brentq(resid, phis[i], phis[i + 1], xtol=1e-12))
    return roots


def _scan(sc: Scenario, contour: QualityContour, n_tau: int, n_phi: int):
    taus = np.geomspace(1e-5, 0.99 * sc.tau_f, n_tau)
    phis = np.linspace(0.001, math.pi / 4 - 0.001, n_phi)
    cands = []
    for t1 in taus:
        for ph in _phi_roots(sc, contour, t1, phis):
            pat, sx = sc.shape(t1, ph)
            cands.append((sc.objective(pat, sx), t1, ph))
    # deterministic order: objective descending, then tau1, phi2
    cands.sort(key=lambda c: (-c[0], c[1], c[2]))
    return cands, phis


def _best_root(sc, contour, tau1, phis, near):
    roots = _phi_roots(sc, contour, tau1, phis)
    if not roots:
        return None
    return min(roots, key=lambda r: abs(r - near))


def _refine(sc: Scenario, contour: QualityContour, cand, phis, n_tau):
    """Maximize the objective along the contour curve phi2*(tau1) near a grid candidate."""
    _, t1, ph = cand
    ratio = (0.99 * sc.tau_f / 1e-5) ** (1 / (n_tau - 1))
    lo, hi = math.log(max(1e-5, t1 / ratio)), math.log(min(0.99 * sc.tau_f, t1 * ratio))
    # local phi bracket keeps the same branch
    dphi = phis[1] - phis[0]
    local = np.linspace(max(0.001, ph - 2 * dphi), min(math.pi / 4 - 0.001, ph + 2 * dphi), 9)

    def neg(logt):
        r = _best_root(sc, contour, math.exp(logt), local, ph)
        if r is None:
            return math.inf
        pat, sx = sc.shape(math.exp(logt), r)
        return -sc.objective(pat, sx)

    res = minimize_scalar(neg, bounds=(lo, hi), method="bounded", options={"xatol": 1e-6})
    t_best = math.exp(res.x)
    r = _best_root(sc, contour, t_best, local, ph)
    if r is None or -res.fun < cand[0]:
        return t1, ph
    return t_best, r


def _exact_phi(sc: Scenario, tau1: float, phi_guess: float, q_target: float) -> float:
    """Polish phi2 so the full metrics hit q_target (contour interpolation removed)."""
    def f(ph):
        pat, _ = sc.shape(tau1, ph)
        return pattern_metrics(pat).quality - q_target

    step = 0.002
    a, b = max(1e-4, phi_guess - step), min(math.pi / 4 - 1e-4, phi_guess + step)
    fa, fb = f(a), f(b)
    while fa * fb > 0 and step < 0.1:
        step *= 2
        a, b = max(1e-4, phi_guess - step), min(math.pi / 4 - 1e-4, phi_guess + step)
        fa, fb = f(a), f(b)
    if fa * fb > 0:
        return phi_guess
    return brentq(f, a, b, xtol=1e-12)


def optimize_coherence_length(radius: float, T_e: float, tau_f: float, q_target: float = 0.005,
                              fringe_target: float = 5e-9, bb: BlackBodyModel | None = None,
                              material: Material = SILICA, omega0: float = TWO_PI * 100e3,
                              omega4: float = TWO_PI * 10e3, nbar: float = 0.5,
                              tau0: float = 2e-3, tau2: float = 10e-6, m_sigma: float = 5.0,
                              n_tau: int = 40, n_phi: int = 40,
                              contour: QualityContour | None = None) -> OptimizationResult:
    """Maximize the certified coherence length on the quality contour.

    Without a black-body model, Lambda_bb = 0 and the result carries a
    flag saying so.
    """
    particle = particle_from_radius(radius, material)
    flags = []
    T_i = None
    lam_bb = 0.0
    if bb is None:
        flags.append("black-body decoherence omitted (Lambda_bb = 0)")
    else:
        p_abs = absorbed_power(particle, omega0)
        T_i = duty_cycle_temperature(particle, bb, T_e, tau0, tau_f, p_abs)
        lam_bb = bb_localization_rate(particle, bb, T_i, T_e)
        if bb.conditional:
            flags.append(f"black-body data conditional ({bb.source})")
    sc = Scenario(particle, tau_f, omega0, omega4, nbar, tau0, tau2, lam_bb, True)
    if contour is None:
        contour = default_contour(q_target)
    elif contour.q_target != q_target:
        raise ValueError("contour was built for a different q_target")
    cands, phis = _scan(sc, contour, n_tau, n_phi)
    if not cands:
        return OptimizationResult(False, T_i=T_i, conditional_flags=tuple(flags),
                                  reason="no (tau1, phi2) on the quality contour")
    t1, ph = _refine(sc, contour, cands[0], phis, n_tau)
    ph = _exact_phi(sc, t1, ph, q_target)
    pat0, _ = sc.shape(t1, ph)
    if MIN_SPACING_FACTOR * pat0.delta_x > fringe_target:
        return OptimizationResult(False, T_i=T_i, conditional_flags=tuple(flags),
                                  reason="fringe spacing exceeds target already at tau4 = 0")
    tau4 = math.log(fringe_target / (MIN_SPACING_FACTOR * pat0.delta_x)) / omega4
    params = sc.params(t1, ph, tau4)
    ev = evaluate(params, particle, lam_bb, "asymptotic", m_sigma)
    return _result(ev, ev.report.x_c_star, T_i, flags, q_target,
                   fringe=MIN_SPACING_FACTOR * ev.pattern.delta_x)


def optimize_splitting(radius: float, tau_f: float, q_target: float = 0.005,
                       g1_min: float = 0.95, material: Material = SILICA,
                       omega0: float = TWO_PI * 100e3, nbar: float = 0.5,
                       tau2: float = 10e-6, m_sigma: float = 5.0,
                       n_tau: int = 40, n_phi: int = 40,
                       contour: QualityContour | None = None) -> OptimizationResult:
    """Maximize the peak distance without the inverted stage, subject to g1 >= g1_min."""
    particle = particle_from_radius(radius, material)
    flags = ["black-body and gas decoherence omitted"]
    sc = Scenario(particle, tau_f, omega0, 0.0, nbar, 2e-3, tau2, 0.0, False)
    if contour is None:
        contour = default_contour(q_target)
    elif contour.q_target != q_target:
        raise ValueError("contour was built for a different q_target")
    cands, phis = _scan(sc, contour, n_tau, n_phi)
    if not cands:
        return OptimizationResult(False, conditional_flags=tuple(flags),
                                  reason="no (tau1, phi2) on the quality contour")
    t1, ph = _refine(sc, contour, cands[0], phis, n_tau)
    ph = _exact_phi(sc, t1, ph, q_target)
    ev = evaluate(sc.params(t1, ph), particle, 0.0, "exact", m_sigma, with_g1=True,
                  with_peak_mass=True)
    if ev.report.g1_peaks is None or ev.report.g1_peaks < g1_min:
        # walk down the candidate list until the coherence constraint holds
        for _, ct1, cph in cands[1:]:
            cph = _exact_phi(sc, ct1, cph, q_target)
            cev = evaluate(sc.params(ct1, cph), particle, 0.0, "exact", m_sigma, with_g1=True,
                           with_peak_mass=True)
            if cev.report.g1_peaks is not None and cev.report.g1_peaks >= g1_min:
                ev = cev
                break
        else:
            return OptimizationResult(False, conditional_flags=tuple(flags),
                                      reason=f"no contour point with g1 >= {g1_min}")
    return _result(ev, PEAK_DISTANCE_FACTOR * ev.pattern.delta_x, None, flags, q_target,
                   g1_min=g1_min)


def _result(ev: Evaluation, objective: float, T_i, flags, q_target, fringe=None,
            g1_min=None) -> OptimizationResult:
    p = ev.params
    cons = dict(quality_target=q_target,
                quality_rel_error=abs(ev.metrics.quality - q_target) / q_target,
                chirp_valid=ev.chirp.valid)
    if fringe is not None:
        cons["min_spacing"] = fringe
    if g1_min is not None:
        cons["g1_min"] = g1_min
    if ev.peak_mass is not None:
        cons["peak_mass"] = ev.peak_mass
    return OptimizationResult(True, p.tau1, p.tau3, p.phi2, p.tau4, math.sqrt(p.omega2_sq),
                              objective, ev.pattern, ev.metrics, ev.report.g1_peaks,
                              ev.chirp.sigma_bc_over_dx, T_i, tuple(flags), cons, "", ev)
