"""Coherence length, certified bound, interference statistics and numeric g1."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import HBAR, GaussianState
from .pattern import Extrema, NoFringesError, decohered_density, extrema_positions
from .protocol import CubicPulse, FringePattern, mapping_length

INF = math.inf


def coherence_length(state: GaussianState) -> float:
    p = state.purity
    if p >= 1:
        return INF
    return 2 * p * math.sqrt(state.var_x) / math.sqrt(1 - p ** 2)


def g1_gaussian(distance: float, x_c: float) -> float:
    if math.isinf(x_c):
        return 1.0
    return math.exp(-distance ** 2 / (2 * x_c ** 2))


def certified_lower_bound(sigma_x1: float, sigma_c: float, sigma_lambda: float) -> float:
    if sigma_lambda == 0:
        return INF
    return 2 * sigma_x1 * sigma_c / sigma_lambda


# -- interference statistics --------------------------------------------------

@dataclass(frozen=True)
class PatternMetrics:
    visibility: float
    p_r: float
    quality: float
    n_runs_5sigma: float
    m_sigma: float = 5.0

    def as_dict(self) -> dict:
        return dict(visibility=self.visibility, p_r=self.p_r, quality=self.quality,
                    n_runs=self.n_runs_5sigma, m_sigma=self.m_sigma)


def run_count(visibility: float, p_r: float, m_sigma: float = 5.0) -> float:
    """Runs needed for an m-sigma confirmation of the second fringe."""
    q = visibility ** 2 * p_r
    if q <= 0:
        return INF
    return float(math.ceil(math.pi ** 2 / 4 * m_sigma ** 2 / q))


def visibility_from_values(p_max: float, p_min: float) -> float:
    if p_max + p_min <= 0:
        return 0.0
    return min(1.0, max(0.0, (p_max - p_min) / (p_max + p_min)))


def _interval_mass(pattern: FringePattern, a: float, b: float) -> float:
    # the integrand varies on the fringe scale; Delta_x/64 gives ~1e-10 absolute
    n = max(64, int(math.ceil((b - a) / (pattern.delta_x / 64))))
    n += n % 2
    x = np.linspace(a, b, n + 1)
    f = decohered_density(pattern, x)
    w = np.ones(n + 1)
    w[1:-1:2] = 4
    w[2:-1:2] = 2
    return float((b - a) / (3 * n) * (w @ f))


def metrics_from_values(p_max2: float, p_min1: float, p_r: float,
                        m_sigma: float = 5.0) -> PatternMetrics:
    v = visibility_from_values(p_max2, p_min1)
    p_r = min(1.0, max(0.0, p_r))
    return PatternMetrics(v, p_r, v ** 2 * p_r, run_count(v, p_r, m_sigma), m_sigma)


def pattern_metrics(pattern: FringePattern, extrema: Extrema | None = None,
                    m_sigma: float = 5.0) -> PatternMetrics:
    """Visibility from the second maximum and first minimum, p_r between the minima."""
    if extrema is None:
        try:
            extrema = extrema_positions(pattern)
        except NoFringesError:
            return PatternMetrics(0.0, 0.0, 0.0, INF, m_sigma)
    vals = decohered_density(pattern, np.array([extrema.x_max2, extrema.x_min1]))
    p_r = _interval_mass(pattern, extrema.x_min2, extrema.x_min1)
    return metrics_from_values(float(vals[0]), float(vals[1]), p_r, m_sigma)


def metrics_from_grid(x, pdf, extrema: Extrema, m_sigma: float = 5.0) -> PatternMetrics:
    """Same statistics from a density sampled on a grid (linear interpolation)."""
    x = np.asarray(x, dtype=float)
    pdf = np.asarray(pdf, dtype=float)
    pmax, pmin = np.interp([extrema.x_max2, extrema.x_min1], x, pdf)
    sel = (x > extrema.x_min2) & (x < extrema.x_min1)
    xs = np.concatenate([[extrema.x_min2], x[sel], [extrema.x_min1]])
    fs = np.interp(xs, x, pdf)
    return metrics_from_values(float(pmax), float(pmin), float(np.trapezoid(fs, xs)), m_sigma)


def peak_mass(pattern: FringePattern, extrema: Extrema | None = None) -> float:
    """Probability to the right of the second minimum, i.e. in the two largest peaks."""
    extrema = extrema or extrema_positions(pattern)
    right = 8 * pattern.delta_x + 8 * pattern.sigma_c + 8 * pattern.sigma_lambda
    return _interval_mass(pattern, extrema.x_min2, right)


@dataclass(frozen=True)
class CoherenceReport:
    x_c: float
    x_c_star: float
    g1_peaks: float | None = None

    def as_dict(self) -> dict:
        return dict(x_c=self.x_c, x_c_star=self.x_c_star, g1_peaks=self.g1_peaks)


# -- density matrix by theta quadrature --------------------------------------

class QuadratureError(RuntimeError):
    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (achieved residual {residual:.3g})")
        self.residual = residual


@dataclass(frozen=True)
class PulsedState:
    """Everything needed to evaluate the density matrix after a free flight.

    ``state`` is the Gaussian state just before the pulse; ``sigma2`` the
    momentum diffusion width accumulated during the pulse.
    """

    state: GaussianState
    mass: float
    pulse: CubicPulse
    tau2: float
    sigma2: float = 0.0

    @property
    def kick_var(self) -> float:
        """Momentum-kick variance equivalent to the mixedness plus pulse noise."""
        p = self.state.purity
        s01 = HBAR ** 2 * (1 / p ** 2 - 1) / (4 * self.state.var_x)
        return s01 + self.sigma2 ** 2

    def residual_chirp(self, b_map: float, a_gain: float) -> float:
        """b_c for a final map x = A x2 + B p2 (1/m^2)."""
        s = self.state
        focus = s.cov_xp / (self.mass * s.var_x) + a_gain / (self.mass * b_map)
        return self.mass / (2 * HBAR) * (focus - self.pulse.omega2_sq * self.tau2)


MAX_THETA_NODES = 2 ** 21
_CHUNK_CELLS = 2 ** 21


def _theta_integral(X, xi, *, vx, kick, b_map, d_map, bres, u3t, rel_tol=1e-8,
                    max_nodes=MAX_THETA_NODES):
    """Density-matrix element rho(X + xi/2, X - xi/2) up to a common constant.

    Works on a scaled theta variable t = P0 * theta. Trapezoid rule on a
    window of eight damping widths, doubled until converged; the integrand
    is analytic and decays to ~e^-32 at the window edge, so the doubling
    sequence converges spectrally. Rows are evaluated in chunks so memory
    stays bounded; a node count beyond ``max_nodes`` raises QuadratureError.
    """
    X = np.atleast_1d(np.asarray(X, dtype=float))
    xi = np.broadcast_to(np.asarray(xi, dtype=float), X.shape)
    w = HBAR ** 2 / (8 * vx) + kick / 2
    p0 = math.sqrt(2 * w)
    g3 = u3t * HBAR ** 2 / (4 * p0 ** 3)
    eta = 6 * u3t * vx / p0
    kap = 2 * HBAR * bres / p0
    half = 8.0
    xs = X / (b_map * p0)
    lin = xi / (HBAR * b_map)
    damp_ratio = np.abs(lin).max() ** 2 * vx / 2 if lin.size else 0.0
    freq = np.abs(xs).max() + 3 * abs(g3) * half ** 2 + abs(eta) * (damp_ratio + kap ** 2 * vx * half ** 2) + 1
    n = int(2 ** math.ceil(math.log2(max(256, 16 * 2 * half * freq / (2 * math.pi)))))

    def evaluate(nodes):
        t = np.linspace(-half, half, nodes + 1)
        h = t[1] - t[0]
        q = 1 - 1j * eta * t
        rq = 1 / np.sqrt(q)
        out = np.empty(xs.size, dtype=complex)
        step = max(1, _CHUNK_CELLS // (nodes + 1))
        for i in range(0, xs.size, step):
            L = -kap * t[None, :] - lin[i:i + step, None]
            expo = (-vx * L ** 2 / (2 * q[None, :]) + 1j * xs[i:i + step, None] * t[None, :]
                    - t[None, :] ** 2 / 2 + 1j * g3 * t[None, :] ** 3)
            f = np.exp(expo) * rq[None, :]
            out[i:i + step] = h * (f.sum(axis=1) - 0.5 * (f[:, 0] + f[:, -1]))
        return out

    if n > max_nodes:
        raise QuadratureError(f"theta quadrature needs at least {n} nodes", math.inf)
    prev = evaluate(n)
    scale = np.max(np.abs(prev))
    resid = math.inf
    while True:
        n *= 2
        if n > max_nodes:
            raise QuadratureError("theta quadrature did not converge", float(resid))
        cur = evaluate(n)
        scale = max(scale, np.max(np.abs(cur)))
        resid = np.max(np.abs(cur - prev))
        if resid <= rel_tol * max(scale, 1e-300):
            phase = np.exp(1j * d_map * X * xi / (HBAR * b_map))
            return cur * phase / (2 * math.pi * abs(b_map) * p0)
        prev = cur


def _theta_setup(ps: PulsedState, tau3: float, omega4: float, tau4: float):
    b = mapping_length(ps.mass, tau3, omega4, tau4, "exact")
    a = math.cosh(omega4 * tau4)
    sh = math.sinh(omega4 * tau4) * ps.mass * omega4 if omega4 > 0 else 0.0
    # x_f = A x + B p, p_f = Cc x + D p with D = (cosh + tau3 * m w4 sinh / m)
    d = math.cosh(omega4 * tau4) + (tau3 / ps.mass) * sh
    bres = -ps.residual_chirp(b, a)
    return dict(vx=ps.state.var_x, kick=ps.kick_var, b_map=b, d_map=d, bres=bres,
                u3t=ps.pulse.u3(ps.mass) * ps.tau2)


def density_matrix(ps: PulsedState, x1, x2, tau3: float, omega4: float = 0.0,
                   tau4: float = 0.0, rel_tol: float = 1e-8) -> np.ndarray:
    """<x1|rho|x2> after the pulse, free flight tau3 and optional inverted stage."""
    if tau3 <= 0:
        raise ValueError("tau3 must be positive")
    x1 = np.atleast_1d(np.asarray(x1, dtype=float))
    x2 = np.atleast_1d(np.asarray(x2, dtype=float))
    X = (x1 + x2) / 2
    xi = x1 - x2
    return _theta_integral(X, xi, rel_tol=rel_tol, **_theta_setup(ps, tau3, omega4, tau4))


def g1_numeric(x1: float, x2: float, ps: PulsedState, tau3: float, omega4: float = 0.0,
               tau4: float = 0.0, rel_tol: float = 1e-8) -> float:
    rho = density_matrix(ps, [x1, x1, x2], [x2, x1, x2], tau3, omega4, tau4, rel_tol)
    denom = math.sqrt(abs(rho[1].real) * abs(rho[2].real))
    if denom == 0:
        return 0.0
    return float(min(1.0, abs(rho[0]) / denom))


def theta_density_scaled(u, p_c: float, p_lambda: float, rel_tol: float = 1e-9) -> np.ndarray:
    """Density of a canonical pattern (Delta_x = 1) from the theta-integral route.

    Uses stand-in parameters with hbar*B = 1 and 3a = 1, so that lengths are
    in units of Delta_x and sigma_x = 1/(2 p_c).
    """
    u = np.atleast_1d(np.asarray(u, dtype=float))
    out = _theta_integral(u, np.zeros_like(u), vx=1.0 / (4 * p_c ** 2),
                          kick=(HBAR * p_lambda) ** 2, b_map=1.0 / HBAR, d_map=1.0,
                          bres=0.0, u3t=HBAR / 3, rel_tol=rel_tol)
    return np.real(out)


def theta_density(x, var_x: float, kick_var: float, b_map: float, u3_tau: float,
                  rel_tol: float = 1e-9) -> np.ndarray:
    """Position density after a far-field map x = B p from the theta integral.

    ``u3_tau`` is the cubic pulse coefficient times the pulse duration; zero
    gives the plain Gaussian far field.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = _theta_integral(x, np.zeros_like(x), vx=var_x, kick=kick_var, b_map=b_map,
                          d_map=1.0, bres=0.0, u3t=u3_tau, rel_tol=rel_tol)
    return np.real(out)
