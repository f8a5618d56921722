"""Physical constants, particle model and Gaussian-state bookkeeping."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import scipy.constants as sc


@dataclass(frozen=True)
class Constants:
    hbar: float = sc.hbar
    k_B: float = sc.k
    c: float = sc.c
    epsilon0: float = sc.epsilon_0
    amu: float = sc.atomic_mass


CONSTANTS = Constants()
HBAR = CONSTANTS.hbar
KB = CONSTANTS.k_B
C_LIGHT = CONSTANTS.c
AMU = CONSTANTS.amu


@dataclass(frozen=True)
class Material:
    """Dielectric sphere material, evaluated at a single laser wavelength."""

    density: float
    specific_heat: float
    refractive_index_re: float
    refractive_index_im: float
    wavelength: float = 1550e-9

    def __post_init__(self):
        if not self.density > 0:
            raise ValueError("density must be positive")
        if not self.specific_heat > 0:
            raise ValueError("specific_heat must be positive")
        if self.refractive_index_im < 0:
            raise ValueError("refractive_index_im must be non-negative")
        if not self.wavelength > 0:
            raise ValueError("wavelength must be positive")

    @property
    def permittivity(self) -> complex:
        return complex(self.refractive_index_re, self.refractive_index_im) ** 2

    @property
    def clausius_mossotti(self) -> complex:
        eps = self.permittivity
        return (eps - 1) / (eps + 2)

    @property
    def wavenumber(self) -> float:
        return 2 * math.pi / self.wavelength


SILICA = Material(density=1850.0, specific_heat=700.0,
                  refractive_index_re=1.43, refractive_index_im=2.46e-9,
                  wavelength=1550e-9)

_MATERIAL_KEYS = {"density", "specific_heat", "refractive_index_re",
                  "refractive_index_im", "wavelength"}


def load_material(path: str | Path) -> Material:
    """Read a material from ``key = value`` lines (SI units, ``#`` comments)."""
    values = dict(density=SILICA.density, specific_heat=SILICA.specific_heat,
                  refractive_index_re=SILICA.refractive_index_re,
                  refractive_index_im=SILICA.refractive_index_im,
                  wavelength=SILICA.wavelength)
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in _MATERIAL_KEYS:
            raise ValueError(f"{path}:{lineno}: unknown material key {key!r}")
        values[key] = float(val)
    return Material(**values)


@dataclass(frozen=True)
class Particle:
    radius: float
    material: Material = SILICA
    volume: float = field(init=False)
    mass: float = field(init=False)
    re_pol_factor: float = field(init=False)
    beta_abs: float = field(init=False)

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("radius must be positive")
        volume = 4.0 / 3.0 * math.pi * self.radius ** 3
        cm = self.material.clausius_mossotti
        object.__setattr__(self, "volume", volume)
        object.__setattr__(self, "mass", self.material.density * volume)
        object.__setattr__(self, "re_pol_factor", cm.real)
        object.__setattr__(self, "beta_abs", cm.imag / cm.real)

    @property
    def wavenumber(self) -> float:
        return self.material.wavenumber


def particle_from_radius(radius: float, material: Material = SILICA) -> Particle:
    return Particle(radius=radius, material=material)


def zero_point_motion(mass: float, omega0: float) -> float:
    if mass <= 0 or omega0 <= 0:
        raise ValueError("mass and omega0 must be positive")
    return math.sqrt(HBAR / (2 * mass * omega0))


def zero_point_momentum(mass: float, omega0: float) -> float:
    if mass <= 0 or omega0 <= 0:
        raise ValueError("mass and omega0 must be positive")
    return math.sqrt(HBAR * omega0 * mass / 2)


@dataclass(frozen=True)
class GaussianState:
    """Second moments of a centred Gaussian state.

    The covariance magnitude is fixed by the purity through
    var_x var_p - cov^2 = hbar^2 / (4 P^2); only its sign is stored.
    """

    var_x: float
    var_p: float
    purity: float
    cross_sign: int = 0

    def __post_init__(self):
        if not (self.var_x > 0 and self.var_p > 0):
            raise ValueError("variances must be positive")
        if not 0 < self.purity <= 1:
            raise ValueError("purity must lie in (0, 1]")
        if self.cross_sign not in (-1, 0, 1):
            raise ValueError("cross_sign must be -1, 0 or +1")
        slack = 4 * self.var_x * self.var_p - HBAR ** 2 / self.purity ** 2
        if slack < -1e-9 * HBAR ** 2 / self.purity ** 2:
            raise ValueError("state violates the uncertainty bound")

    @classmethod
    def from_moments(cls, var_x: float, cov_xp: float, var_p: float) -> "GaussianState":
        det = var_x * var_p - cov_xp ** 2
        if det <= 0:
            raise ValueError("covariance matrix is not positive definite")
        purity = min(1.0, HBAR / (2 * math.sqrt(det)))
        sign = 0 if cov_xp == 0 else (1 if cov_xp > 0 else -1)
        return cls(var_x, var_p, purity, sign)

    @property
    def cov_xp(self) -> float:
        """Symmetrised covariance <xp+px>/2."""
        c2 = self.var_x * self.var_p - HBAR ** 2 / (4 * self.purity ** 2)
        return self.cross_sign * math.sqrt(max(c2, 0.0))

    # Wigner-function coefficients W ∝ exp(-a1 x^2 - a2 p^2 + a3 x p)
    @property
    def a1(self) -> float:
        return 2 * self.purity ** 2 * self.var_p / HBAR ** 2

    @property
    def a2(self) -> float:
        return 2 * self.purity ** 2 * self.var_x / HBAR ** 2

    @property
    def a3(self) -> float:
        return 4 * self.purity ** 2 * self.cov_xp / HBAR ** 2


def thermal_state(mass: float, omega0: float, nbar: float) -> GaussianState:
    if nbar < 0:
        raise ValueError("nbar must be non-negative")
    f = 2 * nbar + 1
    return GaussianState(zero_point_motion(mass, omega0) ** 2 * f,
                         zero_point_momentum(mass, omega0) ** 2 * f,
                         1.0 / f, 0)


def free_fall_state(state: GaussianState, mass: float, t: float,
                    lam: float = 0.0) -> GaussianState:
    """Closed-form moments after free evolution with position localization rate ``lam``."""
    if t < 0:
        raise ValueError("t must be non-negative")
    vx, c, vp = state.var_x, state.cov_xp, state.var_p
    h2 = HBAR ** 2
    var_x = vx + 2 * c * t / mass + vp * t ** 2 / mass ** 2 + 2 * h2 * lam * t ** 3 / (3 * mass ** 2)
    cov = c + vp * t / mass + h2 * lam * t ** 2 / mass
    var_p = vp + 2 * h2 * lam * t
    return GaussianState.from_moments(var_x, cov, var_p)
