"""Position densities of the interference pattern, their extrema and moments.

The Gaussian-smeared Airy amplitude has the closed form

    [Ai * exp(-x^2/4 s^2)](u) ∝ exp(c u) Ai(u + c^2),   c = p_c^2,

in units of Delta_x, so the unitary density is evaluated pointwise with an
exact normalisation; decoherence adds a Gaussian convolution on top.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .airy import log_airy_sq
from .core import HBAR
from .protocol import FringePattern

SEED_MAX1 = -1.0188
SEED_MAX2 = -3.248
SEED_MIN1 = -2.338
SEED_MIN2 = -4.088
SEARCH_HALF_WIDTH = 0.3
KERNEL_WIDTHS = 6.0
STEP_FRACTION = 20.0


class GridError(ValueError):
    """Grid too short or too coarse for the requested pattern."""


class NoFringesError(ValueError):
    """The pattern has no resolvable minimum."""


def required_span(pattern: FringePattern) -> tuple[float, float]:
    dx, sc = pattern.delta_x, pattern.sigma_c
    return -10 * dx - 6 * sc, 4 * dx + 6 * sc


def max_step(pattern: FringePattern) -> float:
    return min(pattern.sigma_c, pattern.delta_x) / STEP_FRACTION


def check_grid(pattern: FringePattern, x: np.ndarray) -> None:
    lo, hi = required_span(pattern)
    if x.ndim != 1 or x.size < 2:
        raise GridError("grid must be a 1-D array with at least two points")
    step = np.max(np.diff(x))
    problems = []
    if x[0] > lo or x[-1] < hi:
        problems.append(f"span [{x[0]:.4g}, {x[-1]:.4g}] m must cover [{lo:.4g}, {hi:.4g}] m")
    if step > max_step(pattern) * (1 + 1e-9):
        problems.append(f"spacing {step:.4g} m exceeds {max_step(pattern):.4g} m")
    if problems:
        raise GridError("; ".join(problems))


def _log_norm(c: float) -> float:
    # ∫ e^{2cu} Ai^2(u + c^2) du = e^{-4c^3/3} / (2 sqrt(2 pi c))
    return math.log(2 * math.sqrt(2 * math.pi * c)) + 4 * c ** 3 / 3


def unitary_density(pattern: FringePattern, x) -> np.ndarray:
    """Unitary density (1/m) at arbitrary points, no grid checks."""
    u = np.asarray(x, dtype=float) / pattern.delta_x
    c = pattern.p_c ** 2
    with np.errstate(under="ignore", over="ignore"):
        logp = _log_norm(c) + 2 * c * u + log_airy_sq(u + c * c)
        return np.exp(logp) / pattern.delta_x


def unitary_pdf(pattern: FringePattern, x_grid) -> np.ndarray:
    x = np.asarray(x_grid, dtype=float)
    check_grid(pattern, x)
    return unitary_density(pattern, x)


def _kernel_nodes(sigma: float, step: float) -> tuple[np.ndarray, np.ndarray]:
    n = int(math.ceil(KERNEL_WIDTHS * sigma / step))
    s = np.arange(-n, n + 1) * step
    w = np.exp(-s ** 2 / (2 * sigma ** 2)) * step / (math.sqrt(2 * math.pi) * sigma)
    return s, w


def decohered_density(pattern: FringePattern, x) -> np.ndarray:
    """P * G(sigma_lambda) at arbitrary points via trapezoid quadrature over the kernel."""
    x = np.asarray(x, dtype=float)
    if pattern.sigma_lambda == 0:
        return unitary_density(pattern, x)
    # integrand is entire, so the trapezoid rule is spectrally accurate at this step
    step = min(pattern.delta_x / 6, pattern.sigma_lambda / 2)
    s, w = _kernel_nodes(pattern.sigma_lambda, step)
    vals = unitary_density(pattern, x[..., None] - s)
    return vals @ w


def decohered_pdf(pattern: FringePattern, x_grid) -> np.ndarray:
    """Decohered density on a uniform grid.

    The grid is extended internally by six kernel widths so that every
    output node sees the full kernel support.
    """
    x = np.asarray(x_grid, dtype=float)
    check_grid(pattern, x)
    if pattern.sigma_lambda == 0:
        return unitary_density(pattern, x)
    h = x[1] - x[0]
    if not np.allclose(np.diff(x), h, rtol=1e-9, atol=0):
        raise GridError("decohered_pdf needs a uniform grid")
    s, w = _kernel_nodes(pattern.sigma_lambda, h)
    n = (s.size - 1) // 2
    ext = x[0] + np.arange(-n, x.size + n) * h
    base = unitary_density(pattern, ext)
    return np.convolve(base, w, mode="valid")


@dataclass(frozen=True)
class Extrema:
    x_max1: float
    x_max2: float
    x_min1: float
    x_min2: float

    def as_dict(self) -> dict:
        return dict(x_max1=self.x_max1, x_max2=self.x_max2,
                    x_min1=self.x_min1, x_min2=self.x_min2)


def seed_positions(pattern: FringePattern) -> Extrema:
    dx = pattern.delta_x
    shift = pattern.sigma_c ** 4 / dx ** 3
    return Extrema(SEED_MAX1 * dx - shift, SEED_MAX2 * dx - shift,
                   SEED_MIN1 * dx - shift, SEED_MIN2 * dx - shift)


def _refine(f, seed: float, half: float, sign: float) -> float:
    res = minimize_scalar(lambda x: sign * float(f(np.array([x]))[0]),
                          bounds=(seed - half, seed + half), method="bounded",
                          options={"xatol": half * 1e-9, "maxiter": 500})
    return float(res.x)


def extrema_positions(pattern: FringePattern) -> Extrema:
    """Two largest maxima and the two minima closest to the main peak."""
    seeds = seed_positions(pattern)
    half = SEARCH_HALF_WIDTH * pattern.delta_x
    f = lambda x: decohered_density(pattern, x)  # noqa: E731
    mx1 = _refine(f, seeds.x_max1, half, -1.0)
    mx2 = _refine(f, seeds.x_max2, half, -1.0)
    mn1 = _refine(f, seeds.x_min1, half, 1.0)
    mn2 = _refine(f, seeds.x_min2, half, 1.0)
    edge = 1e-3 * half
    for name, pos, seed in (("x_min1", mn1, seeds.x_min1), ("x_min2", mn2, seeds.x_min2)):
        if abs(abs(pos - seed) - half) < edge:
            raise NoFringesError(f"no fringes: {name} search hit the window edge")
    vals = f(np.array([mx2, mn1, mx1]))
    if not (vals[1] < vals[0] and vals[1] < vals[2]):
        raise NoFringesError("no fringes: first minimum is not below its neighbours")
    return Extrema(mx1, mx2, mn1, mn2)


def moments_after_step4(pattern: FringePattern, mass: float, omega4: float) -> dict:
    """First and second moments of position and momentum after the inverted stage."""
    dx, sc, sl = pattern.delta_x, pattern.sigma_c, pattern.sigma_lambda
    mean_x = -dx ** 3 / (4 * sc ** 2)
    second_x = sc ** 2 * (1 + 3 * dx ** 6 / (16 * sc ** 6)) + sl ** 2
    mw = mass * omega4
    mean_p = mw * mean_x
    second_p = (HBAR ** 2 / (4 * sc ** 2)
                + 3 * mw ** 2 * dx ** 6 / (16 * sc ** 4) + mw ** 2 * sc ** 2 + mw ** 2 * sl ** 2)
    return dict(mean_x=mean_x, var_x=second_x - mean_x ** 2, second_x=second_x,
                mean_p=mean_p, var_p=second_p - mean_p ** 2, second_p=second_p)


def pattern_grid(pattern: FringePattern, tail: float = 1e-10) -> np.ndarray:
    """Uniform grid holding all but ~``tail`` of the probability mass.

    The left tail decays like exp(2 p_c^2 x / Delta_x), so the lower edge
    is set from that decay length.
    """
    dx, c = pattern.delta_x, pattern.p_c ** 2
    lo0, hi0 = required_span(pattern)
    lo = min(lo0, -math.log(1 / tail) / (2 * c) * dx) - 8 * pattern.sigma_lambda
    hi = max(hi0, 6 * dx + 8 * pattern.sigma_c) + 8 * pattern.sigma_lambda
    h = max_step(pattern)
    n = int(math.ceil((hi - lo) / h)) + 1
    return lo + np.arange(n) * h
