"""Localization rates and the blurring-variance budget."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import HBAR, Particle, free_fall_state, thermal_state
from .protocol import ProtocolParams, mapping_length, position_gain


def recoil_rate(phi: float, omega: float, particle: Particle,
                wavelength: float | None = None) -> float:
    """Photon-recoil localization rate along a standing wave of trap frequency ``omega``."""
    if omega < 0:
        raise ValueError("omega must be non-negative")
    lam = wavelength or particle.material.wavelength
    return (math.pi ** 2 * omega ** 2 * particle.material.density * particle.volume ** 2
            * particle.re_pol_factor * (7 - 3 * math.cos(2 * phi)) / (5 * HBAR * lam ** 3))


def step4_recoil(omega4: float, particle: Particle, wavelength: float | None = None) -> float:
    if omega4 <= 0:
        raise ValueError("omega4 must be positive")
    return recoil_rate(math.pi / 2, omega4, particle, wavelength)


# Angular split of the recoil heating; beta_x is the one entering recoil_rate.
def beta_x(phi: float, k: float) -> float:
    return k ** 2 * (7 - 3 * math.cos(2 * phi)) / 10


def beta_y(phi: float, k: float) -> float:
    return k ** 2 * math.cos(phi) ** 2 / 5


def beta_z(phi: float, k: float) -> float:
    return 2 * k ** 2 * math.cos(phi) ** 2 / 5


def purity_after_free_fall(nbar: float, lambda1: float, tau1: float, sigma_x1: float) -> float:
    """Approximate purity after free fall; valid for omega0 tau1 >> 1."""
    return 1.0 / math.sqrt(8.0 / 3.0 * lambda1 * tau1 * sigma_x1 ** 2 + (2 * nbar + 1) ** 2)


@dataclass(frozen=True)
class LocalizationRates:
    lambda1: float = 0.0
    lambda2: float = 0.0
    lambda3: float = 0.0
    lambda4: float = 0.0

    def __post_init__(self):
        for name in ("lambda1", "lambda2", "lambda3", "lambda4"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    def as_dict(self) -> dict:
        return dict(lambda1=self.lambda1, lambda2=self.lambda2,
                    lambda3=self.lambda3, lambda4=self.lambda4)


def protocol_rates(params: ProtocolParams, particle: Particle, lambda_bb: float = 0.0,
                   wavelength: float | None = None) -> LocalizationRates:
    """Black-body rate in the free-fall steps, photon recoil in the light steps."""
    l2 = recoil_rate(params.phi2, params.omega_p, particle, wavelength)
    l4 = step4_recoil(params.omega4, particle, wavelength) if params.omega4 > 0 else 0.0
    return LocalizationRates(lambda_bb, l2, lambda_bb, l4)


@dataclass(frozen=True)
class BlurringBudget:
    """Blur contributions in native units (momentum for sigma01/sigma2, position otherwise).

    ``mode`` selects how momentum noise before step 3 and the noise of
    steps 3 and 4 are mapped to the final position: ``asymptotic`` uses the
    large omega4*tau4 composition, ``exact`` the full hyperbolic map.
    """

    sigma01: float
    sigma2: float
    sigma3: float
    sigma4: float
    sigma5: float
    sigma_lambda: float
    mass: float
    tau3: float
    omega4: float
    tau4: float
    mode: str = "asymptotic"
    step3_cross: float = 0.0  # exact mode: x-p covariance of step-3 noise
    step3_var_p: float = 0.0  # exact mode: momentum variance of step-3 noise

    def compose(self) -> float:
        return compose_sigma_lambda(self.sigma01, self.sigma2, self.sigma3, self.sigma4,
                                    self.sigma5, self.mass, self.tau3, self.omega4,
                                    self.tau4, self.mode, self.step3_cross, self.step3_var_p)

    def as_dict(self) -> dict:
        return dict(sigma01=self.sigma01, sigma2=self.sigma2, sigma3=self.sigma3,
                    sigma4=self.sigma4, sigma5=self.sigma5, sigma_lambda=self.sigma_lambda,
                    mapping_mode=self.mode)


def compose_sigma_lambda(sigma01, sigma2, sigma3, sigma4, sigma5, mass, tau3, omega4, tau4,
                         mode="asymptotic", step3_cross=0.0, step3_var_p=0.0) -> float:
    mom = sigma2 ** 2 + sigma01 ** 2
    if mode == "asymptotic":
        if omega4 == 0:
            return math.sqrt(mom * (tau3 / mass) ** 2 + sigma3 ** 2 + sigma5 ** 2)
        inner = mom * ((omega4 * tau3 + 1) / (mass * omega4)) ** 2 + sigma3 ** 2 + sigma4 ** 2
        return math.sqrt(inner * math.exp(2 * omega4 * tau4) / 4 + sigma5 ** 2)
    if mode != "exact":
        raise ValueError(f"unknown mode {mode!r}")
    b = mapping_length(mass, tau3, omega4, tau4, "exact")
    ch = position_gain(omega4, tau4, "exact")
    sh = math.sinh(omega4 * tau4) / omega4 if omega4 > 0 else tau4
    s3 = (ch ** 2 * sigma3 ** 2 + 2 * ch * sh / mass * step3_cross
          + (sh / mass) ** 2 * step3_var_p)
    return math.sqrt(mom * b ** 2 + s3 + sigma4 ** 2 + sigma5 ** 2)


def blurring_budget(params: ProtocolParams, particle: Particle, rates: LocalizationRates,
                    sigma_x1: float | None = None, nbar: float | None = None,
                    mode: str = "asymptotic") -> BlurringBudget:
    m = particle.mass
    nbar = params.nbar if nbar is None else nbar
    s1 = free_fall_state(thermal_state(m, params.omega0, nbar), m, params.tau1, rates.lambda1)
    sx = math.sqrt(s1.var_x) if sigma_x1 is None else sigma_x1
    p = s1.purity
    sigma01 = math.sqrt(HBAR ** 2 * (1 - p ** 2) / (4 * p ** 2 * sx ** 2))
    sigma2 = math.sqrt(2 * HBAR ** 2 * rates.lambda2 * params.tau2)
    sigma3 = math.sqrt(2 * HBAR ** 2 * rates.lambda3 * params.tau3 ** 3 / (3 * m ** 2))
    w4, t4 = params.omega4, params.tau4
    cross = vp3 = 0.0
    if mode == "asymptotic":
        sigma4 = math.sqrt(HBAR ** 2 * rates.lambda4 / (m ** 2 * w4 ** 3)) if w4 > 0 else 0.0
    else:
        if w4 > 0 and t4 > 0:
            sigma4 = math.sqrt(2 * HBAR ** 2 * rates.lambda4 / (m ** 2 * w4 ** 2)
                               * (math.sinh(2 * w4 * t4) / (4 * w4) - t4 / 2))
        else:
            sigma4 = math.sqrt(2 * HBAR ** 2 * rates.lambda4 * t4 ** 3 / (3 * m ** 2))
        cross = HBAR ** 2 * rates.lambda3 * params.tau3 ** 2 / m
        vp3 = 2 * HBAR ** 2 * rates.lambda3 * params.tau3
    total = compose_sigma_lambda(sigma01, sigma2, sigma3, sigma4, params.sigma5, m,
                                 params.tau3, w4, t4, mode, cross, vp3)
    return BlurringBudget(sigma01, sigma2, sigma3, sigma4, params.sigma5, total, m,
                          params.tau3, w4, t4, mode, cross, vp3)
