"""Protocol parameters and the closed-form length scales of the fringe pattern."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

from .core import HBAR, GaussianState, Particle, free_fall_state, thermal_state

PHI2_WARN = math.pi / 8


class ProtocolWarning(UserWarning):
    """A parameter lies outside the regime assumed by the closed forms."""


@dataclass(frozen=True)
class ProtocolParams:
    omega0: float
    nbar: float
    tau0: float
    tau1: float
    phi2: float
    omega_p: float
    tau2: float
    tau3: float
    omega4: float
    tau4: float
    sigma5: float = 0.0

    def __post_init__(self):
        for name in ("tau0", "tau1", "tau2", "tau3", "tau4"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if not 0 < self.phi2 < math.pi / 4:
            raise ValueError("phi2 must lie in (0, pi/4)")
        if self.omega0 <= 0 or self.omega_p < 0 or self.omega4 < 0:
            raise ValueError("frequencies must be positive")
        if self.nbar < 0 or self.sigma5 < 0:
            raise ValueError("nbar and sigma5 must be non-negative")

    def regime_warnings(self) -> list[str]:
        out = []
        if self.omega0 * self.tau1 < 10:
            out.append(f"omega0*tau1 = {self.omega0 * self.tau1:.3g} is not >> 1")
        if self.tau4 > 0 and self.omega4 * self.tau3 < 10:
            out.append(f"omega4*tau3 = {self.omega4 * self.tau3:.3g} is not >> 1")
        if self.phi2 > PHI2_WARN:
            out.append(f"phi2 = {self.phi2:.4g} exceeds pi/8")
        return out

    @property
    def omega2_sq(self) -> float:
        return math.cos(2 * self.phi2) * self.omega_p ** 2

    @staticmethod
    def omega_p_for(omega2_sq: float, phi2: float) -> float:
        """Intensity scale omega_p that yields harmonic stiffness omega2_sq at angle phi2."""
        return math.sqrt(omega2_sq / math.cos(2 * phi2))


@dataclass(frozen=True)
class CubicPulse:
    omega2_sq: float
    inv_l: float
    k: float

    def __post_init__(self):
        if not self.omega2_sq > 0:
            raise ValueError("omega2_sq must be positive")
        if self.inv_l < 0:
            raise ValueError("inv_l must be non-negative")

    @classmethod
    def from_standing_wave(cls, omega_p: float, phi2: float, wavelength: float) -> "CubicPulse":
        k = 2 * math.pi / wavelength
        return cls(math.cos(2 * phi2) * omega_p ** 2, k / 3 * math.tan(2 * phi2), k)

    @classmethod
    def from_params(cls, params: ProtocolParams, wavelength: float) -> "CubicPulse":
        return cls.from_standing_wave(params.omega_p, params.phi2, wavelength)

    def u2(self, mass: float) -> float:
        return mass * self.omega2_sq / 2

    def u3(self, mass: float) -> float:
        return mass * self.omega2_sq * self.inv_l

    def airy_rate(self, mass: float, tau2: float) -> float:
        """a = m w2^2 tau2 / (l hbar); the pulse phase cubic coefficient is -a x^3."""
        return mass * self.omega2_sq * tau2 * self.inv_l / HBAR


@dataclass(frozen=True)
class FringePattern:
    delta_x: float
    sigma_c: float
    sigma_lambda: float = 0.0

    def __post_init__(self):
        if not (self.delta_x > 0 and self.sigma_c > 0):
            raise ValueError("delta_x and sigma_c must be positive")
        if self.sigma_lambda < 0:
            raise ValueError("sigma_lambda must be non-negative")

    @property
    def p_c(self) -> float:
        return self.sigma_c / self.delta_x

    @property
    def p_lambda(self) -> float:
        return self.sigma_lambda / self.delta_x

    def with_blur(self, sigma_lambda: float) -> "FringePattern":
        return FringePattern(self.delta_x, self.sigma_c, sigma_lambda)

    @classmethod
    def canonical(cls, p_c: float, p_lambda: float = 0.0) -> "FringePattern":
        return cls(1.0, p_c, p_lambda)


# -- free fall ---------------------------------------------------------------

def state_after_step1(params: ProtocolParams, mass: float, lambda1: float = 0.0) -> GaussianState:
    return free_fall_state(thermal_state(mass, params.omega0, params.nbar), mass, params.tau1, lambda1)


def sigma_x_after_free_fall(state: GaussianState, mass: float, tau1: float,
                            lambda1: float = 0.0) -> float:
    return math.sqrt(free_fall_state(state, mass, tau1, lambda1).var_x)


# -- mapping of steps 3 and 4 -----------------------------------------------

def _shc(omega4: float, tau4: float) -> tuple[float, float]:
    """(cosh(w4 t4), sinh(w4 t4)/w4) with the w4 -> 0 limit."""
    wt = omega4 * tau4
    if wt == 0:
        return 1.0, tau4
    return math.cosh(wt), math.sinh(wt) / omega4


def mapping_length(mass: float, tau3: float, omega4: float, tau4: float,
                   mode: str = "exact") -> float:
    """Coefficient B in x_final = A x_2 + B p_2 for steps 3 and 4 (units s/kg)."""
    if mode == "exact":
        ch, sh = _shc(omega4, tau4)
        return (tau3 * ch + sh) / mass
    if mode == "asymptotic":
        if omega4 == 0:
            raise ValueError("asymptotic mapping needs omega4 > 0")
        return (tau3 + 1 / omega4) * math.exp(omega4 * tau4) / (2 * mass)
    raise ValueError(f"unknown mapping mode {mode!r}")


def position_gain(omega4: float, tau4: float, mode: str = "exact") -> float:
    """Coefficient A in x_final = A x_2 + B p_2."""
    if mode == "exact":
        return _shc(omega4, tau4)[0]
    return math.exp(omega4 * tau4) / 2


def _lens_term(tau3: float, omega4: float, tau4: float) -> float:
    """A/(m B): the focusing strength the pulse must supply for steps 3-4."""
    if omega4 == 0 or tau4 == 0:
        return 1.0 / tau3
    return omega4 / (omega4 * tau3 + math.tanh(omega4 * tau4))


def mapping_condition_omega2sq_tau2(tau1: float, tau3: float, omega4: float, tau4: float,
                                    state_after_step1: GaussianState, mass: float,
                                    form: str = "exact") -> float:
    """Value of w2^2 tau2 for which the residual quadratic phase b_c vanishes."""
    if tau1 <= 0 or tau3 <= 0:
        raise ValueError("tau1 and tau3 must be positive")
    if form == "limit":
        return mapping_condition_limit(tau1, tau3)
    if form != "exact":
        raise ValueError(f"unknown form {form!r}")
    s = state_after_step1
    return s.cov_xp / (mass * s.var_x) + _lens_term(tau3, omega4, tau4)


def mapping_condition_limit(tau1: float, tau3: float) -> float:
    if tau1 <= 0 or tau3 <= 0:
        raise ValueError("tau1 and tau3 must be positive")
    return 1.0 / tau1 + 1.0 / tau3


# -- length scales -------------------------------------------------------------

def fringe_ratio(sigma_x1: float, mass: float, pulse: CubicPulse, tau2: float) -> float:
    """Delta_x / sigma_c."""
    if pulse.inv_l == 0:
        raise ValueError("no cubic term, no fringes")
    return 2 * sigma_x1 * (3 * pulse.airy_rate(mass, tau2)) ** (1 / 3)


def sigma_c_with_inversion(sigma_x1: float, mass: float, tau3: float, omega4: float,
                           tau4: float) -> float:
    if omega4 * tau4 < 2:
        warnings.warn("sigma_c formula assumes omega4*tau4 >> 1", ProtocolWarning, stacklevel=2)
    return HBAR * (omega4 * tau3 + 1) * math.exp(omega4 * tau4) / (4 * sigma_x1 * mass * omega4)


def fringe_pattern(sigma_x1: float, mass: float, pulse: CubicPulse, tau2: float,
                   b_map: float, sigma_lambda: float = 0.0) -> FringePattern:
    """Pattern for a momentum-to-position map x = B p (plus a position term)."""
    if pulse.inv_l == 0:
        raise ValueError("no cubic term, no fringes")
    a3 = (3 * pulse.airy_rate(mass, tau2)) ** (1 / 3)
    return FringePattern(HBAR * abs(b_map) * a3, HBAR * abs(b_map) / (2 * sigma_x1), sigma_lambda)


def pattern_with_inversion(sigma_x1: float, mass: float, pulse: CubicPulse, tau2: float,
                           tau3: float, omega4: float, tau4: float, sigma_lambda: float = 0.0,
                           mode: str = "asymptotic") -> FringePattern:
    return fringe_pattern(sigma_x1, mass, pulse, tau2,
                          mapping_length(mass, tau3, omega4, tau4, mode), sigma_lambda)


def pattern_no_inversion(sigma_x1: float, mass: float, pulse: CubicPulse, tau2: float,
                         tau3: float, sigma2: float, sigma01: float) -> FringePattern:
    if tau3 <= 0:
        raise ValueError("tau3 must be positive")
    b = tau3 / mass
    return fringe_pattern(sigma_x1, mass, pulse, tau2, b, math.hypot(sigma2, sigma01) * b)


# -- residual chirp --------------------------------------------------------------

@dataclass(frozen=True)
class ChirpResidual:
    b_c: float
    sigma_bc_over_dx: float

    @property
    def valid(self) -> bool:
        return self.sigma_bc_over_dx < 1


def b_c_residual(params: ProtocolParams, state: GaussianState, pulse: CubicPulse,
                 mass: float) -> ChirpResidual:
    """Quadratic phase left in the momentum amplitude after the pulse.

    ``state`` is the state after step 1. b_c is positive when the pulse
    under-focuses; the validity ratio uses |b_c|.
    """
    target = mapping_condition_omega2sq_tau2(params.tau1, params.tau3, params.omega4,
                                             params.tau4, state, mass)
    b_c = mass / (2 * HBAR) * (target - pulse.omega2_sq * params.tau2)
    a3 = (3 * pulse.airy_rate(mass, params.tau2)) ** (1 / 3)
    return ChirpResidual(b_c, math.sqrt(abs(b_c) / 4) / a3)


def pulse_for_mapping(params: ProtocolParams, particle: Particle, lambda1: float = 0.0,
                      form: str = "exact") -> ProtocolParams:
    """Copy of ``params`` with omega_p chosen so the mapping condition holds."""
    state = state_after_step1(params, particle.mass, lambda1)
    w2t = mapping_condition_omega2sq_tau2(params.tau1, params.tau3, params.omega4,
                                          params.tau4, state, particle.mass, form)
    return replace(params, omega_p=ProtocolParams.omega_p_for(w2t / params.tau2, params.phi2))
