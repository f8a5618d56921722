"""Grid propagation of the unitary protocol and moment ODEs for the decoherence formulas.

Everything here is an independent check on the closed forms: the wave
function is pushed through the protocol with FFT-based split-operator
steps, and the localization master equation is integrated for second
moments only.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .airy import airy
from .coherence import theta_density_scaled
from .core import HBAR, GaussianState, Particle, free_fall_state, particle_from_radius, thermal_state
from .decoherence import purity_after_free_fall
from .pattern import extrema_positions, decohered_density, NoFringesError
from .pipeline import mapped_params
from .protocol import (CubicPulse, FringePattern, ProtocolParams, mapping_length,
                       position_gain, state_after_step1)

MIN_POINTS = 2 ** 10
GUARD_FRACTION = 0.05
BOUNDARY_TOL = 1e-8
LEAKAGE_TOL = 1e-6
SHORT_PULSE_RATIO = 1e-3
MAX_OMEGA4_TAU4 = 2.0


class GridInsufficient(RuntimeError):
    """The grid cannot hold the state: probability reached the absorbing edge."""

    def __init__(self, message: str, value: float):
        super().__init__(f"grid insufficient: {message} ({value:.3g})")
        self.value = value


@dataclass(frozen=True)
class Grid1D:
    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        n = self.n_points
        if n < MIN_POINTS or n & (n - 1):
            raise ValueError(f"n_points must be a power of two >= {MIN_POINTS}")
        if not self.x_max > self.x_min:
            raise ValueError("x_max must exceed x_min")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_points

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n_points)

    @property
    def k(self) -> np.ndarray:
        return 2 * np.pi * np.fft.fftfreq(self.n_points, self.dx)

    @classmethod
    def covering(cls, x_min: float, x_max: float, dx_max: float,
                 max_points: int = 2 ** 20) -> "Grid1D":
        n = max(MIN_POINTS, 1 << math.ceil(math.log2((x_max - x_min) / dx_max)))
        if n > max_points:
            raise GridInsufficient("required points exceed limit", float(n))
        return cls(x_min, x_max, n)

    def resolves(self, pattern: FringePattern) -> bool:
        return self.dx <= min(pattern.sigma_c, pattern.delta_x) / 20

    def guard_mask(self) -> np.ndarray:
        """cos^8 taper over the outer GUARD_FRACTION at each end."""
        n = self.n_points
        w = max(1, int(round(GUARD_FRACTION * n)))
        m = np.ones(n)
        ramp = np.cos(np.pi / 2 * (np.arange(w, 0, -1) / w)) ** 8
        m[:w] = ramp
        m[n - w:] = ramp[::-1]
        return m

    def guard_band(self) -> np.ndarray:
        w = max(1, int(round(GUARD_FRACTION * self.n_points)))
        sel = np.zeros(self.n_points, dtype=bool)
        sel[:w] = sel[-w:] = True
        return sel


@dataclass
class WavefunctionFrame:
    """A mixture of wave functions on a grid; one row of ``amplitudes`` per component."""

    grid: Grid1D
    amplitudes: np.ndarray
    time: float = 0.0
    weights: np.ndarray = field(default_factory=lambda: np.ones(1))
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        self.amplitudes = np.atleast_2d(np.asarray(self.amplitudes, dtype=complex))
        self.weights = np.asarray(self.weights, dtype=float)
        if self.amplitudes.shape != (self.weights.size, self.grid.n_points):
            raise ValueError("amplitudes must have one row per weight and one column per grid point")

    def norms(self) -> np.ndarray:
        return np.sum(np.abs(self.amplitudes) ** 2, axis=1) * self.grid.dx

    @property
    def density(self) -> np.ndarray:
        return self.weights @ (np.abs(self.amplitudes) ** 2)

    def to_csv(self, path: str | Path, header: str = "") -> None:
        psi = self.amplitudes[0]
        with open(path, "w", newline="") as fh:
            for line in header.splitlines():
                fh.write(f"# {line}\n")
            fh.write(f"# time_s={self.time!r} components={self.weights.size}\n")
            w = csv.writer(fh)
            w.writerow(["x_m", "re_psi0_per_sqrt_m", "im_psi0_per_sqrt_m", "density_per_m"])
            for row in zip(self.grid.x, psi.real, psi.imag, self.density):
                w.writerow([repr(float(v)) for v in row])


# -- initial state -----------------------------------------------------------------

def thermal_weights(nbar: float, tol: float = 1e-10, max_states: int = 200) -> np.ndarray:
    if nbar < 0:
        raise ValueError("nbar must be non-negative")
    if nbar == 0:
        return np.ones(1)
    r = nbar / (nbar + 1)
    n = min(max_states, max(1, math.ceil(math.log(tol) / math.log(r))))
    w = (1 - r) * r ** np.arange(n)
    return w / w.sum()


def hermite_functions(x: np.ndarray, sigma0: float, count: int) -> np.ndarray:
    """Harmonic-oscillator eigenfunctions with ground-state width sigma0."""
    xi = x / (math.sqrt(2) * sigma0)
    out = np.empty((count, x.size))
    out[0] = (2 * np.pi * sigma0 ** 2) ** -0.25 * np.exp(-x ** 2 / (4 * sigma0 ** 2))
    if count > 1:
        out[1] = math.sqrt(2) * xi * out[0]
    for n in range(1, count - 1):
        out[n + 1] = math.sqrt(2 / (n + 1)) * xi * out[n] - math.sqrt(n / (n + 1)) * out[n - 1]
    return out


def thermal_frame(grid: Grid1D, mass: float, omega0: float, nbar: float,
                  tol: float = 1e-10) -> WavefunctionFrame:
    w = thermal_weights(nbar, tol)
    sigma0 = math.sqrt(HBAR / (2 * mass * omega0))
    return WavefunctionFrame(grid, hermite_functions(grid.x, sigma0, w.size).astype(complex),
                             0.0, w)


# -- elementary steps ------------------------------------------------------------------

def _kinetic(frame: WavefunctionFrame, mass: float, t: float) -> None:
    phase = np.exp(-1j * HBAR * frame.grid.k ** 2 * t / (2 * mass))
    frame.amplitudes = np.fft.ifft(np.fft.fft(frame.amplitudes, axis=1) * phase, axis=1)


def _check_edges(frame: WavefunctionFrame, where: str) -> None:
    g = frame.grid
    dens = np.abs(frame.amplitudes) ** 2
    # mixture-weighted: a far-out component with negligible weight is harmless
    edge = float(frame.weights @ np.sum(dens[:, g.guard_band()], axis=1) * g.dx)
    if edge > BOUNDARY_TOL:
        raise GridInsufficient(f"probability {where} in the position guard band", edge)
    power = np.abs(np.fft.fft(frame.amplitudes, axis=1)) ** 2
    kabs = np.abs(g.k)
    hi = kabs > (1 - GUARD_FRACTION) * kabs.max()
    frac = float(frame.weights @ (power[:, hi].sum(axis=1) / power.sum(axis=1)))
    if frac > BOUNDARY_TOL:
        raise GridInsufficient(f"probability {where} near the momentum cut-off", frac)


def _finish_segment(frame: WavefunctionFrame, where: str, before: np.ndarray) -> None:
    after = frame.norms()
    drift = float(abs(frame.weights @ (after - before)))
    frame.diagnostics.setdefault("norm_drift", []).append(drift)
    _check_edges(frame, where)
    frame.amplitudes *= frame.grid.guard_mask()
    masked = frame.norms()
    leak = float(frame.weights @ (after - masked))
    total = frame.diagnostics.get("leakage", 0.0) + leak
    frame.diagnostics["leakage"] = total
    if total > LEAKAGE_TOL:
        raise GridInsufficient("absorbed norm", total)


def free_evolution(frame: WavefunctionFrame, mass: float, t: float, where: str = "free") -> None:
    """Exact free propagation in one FFT step."""
    before = frame.norms()
    _kinetic(frame, mass, t)
    frame.time += t
    _finish_segment(frame, where, before)


def split_operator(frame: WavefunctionFrame, mass: float, potential: np.ndarray, t: float,
                   steps: int, where: str) -> None:
    """Strang splitting: half kinetic, full potential, half kinetic."""
    before = frame.norms()
    dt = t / steps
    vphase = np.exp(-1j * potential * dt / HBAR)
    _kinetic(frame, mass, dt / 2)
    for i in range(steps):
        frame.amplitudes *= vphase
        _kinetic(frame, mass, dt if i < steps - 1 else dt / 2)
    frame.time += t
    _finish_segment(frame, where, before)


def pulse_potential(x: np.ndarray, params: ProtocolParams, mass: float, wavelength: float,
                    mode: str = "polynomial") -> np.ndarray:
    """Step-2 potential; the standing-wave form includes the linear force compensation."""
    pulse = CubicPulse.from_params(params, wavelength)
    if mode == "polynomial":
        return pulse.u2(mass) * x ** 2 + pulse.u3(mass) * x ** 3
    if mode == "standing_wave":
        k = pulse.k
        wp2 = params.omega_p ** 2
        two_phi = 2 * params.phi2
        v = -mass * wp2 / (4 * k ** 2) * (np.cos(2 * k * x - two_phi) - math.cos(two_phi))
        return v + mass * wp2 * math.sin(two_phi) / (2 * k) * x
    raise ValueError(f"unknown potential mode {mode!r}")


def short_pulse_ratio(frame: WavefunctionFrame, potential: np.ndarray, mass: float,
                      tau2: float) -> float:
    """Kinetic phase accumulated during the pulse relative to the potential phase.

    Kinetic phase: tau2 <p^2>/(2 m hbar) with <p^2> the larger of the
    before/after second moments; potential phase: max |V| tau2/hbar over
    the region holding the state.
    """
    g = frame.grid
    dens = frame.density
    support = dens > 1e-10 * dens.max()
    v_phase = float(np.max(np.abs(potential[support]))) * tau2 / HBAR
    if v_phase == 0:
        return math.inf

    def p2(amps):
        power = np.abs(np.fft.fft(amps, axis=1)) ** 2
        return float(frame.weights @ (power @ (HBAR * g.k) ** 2 / power.sum(axis=1)))

    kicked = frame.amplitudes * np.exp(-1j * potential * tau2 / HBAR)
    k_phase = tau2 * max(p2(frame.amplitudes), p2(kicked)) / (2 * mass * HBAR)
    return k_phase / v_phase


def apply_pulse(frame: WavefunctionFrame, potential: np.ndarray, mass: float, tau2: float,
                substeps: int = 64) -> str:
    ratio = short_pulse_ratio(frame, potential, mass, tau2)
    frame.diagnostics["short_pulse_ratio"] = ratio
    if ratio < SHORT_PULSE_RATIO:
        before = frame.norms()
        frame.amplitudes *= np.exp(-1j * potential * tau2 / HBAR)
        frame.time += tau2
        _finish_segment(frame, "after the pulse", before)
        return "phase"
    split_operator(frame, mass, potential, tau2, substeps, "after the pulse")
    return "split"


def propagate_protocol(params: ProtocolParams, particle: Particle, grid: Grid1D,
                       potential_mode: str = "polynomial", wavelength: float | None = None,
                       step4_steps: int | None = None, weight_tol: float = 1e-10,
                       ) -> WavefunctionFrame:
    """Unitary propagation of the thermal mixture through steps 1-4.

    Raises GridInsufficient when probability reaches the grid edges.
    """
    if params.omega4 * params.tau4 > MAX_OMEGA4_TAU4:
        raise ValueError(f"omega4*tau4 must not exceed {MAX_OMEGA4_TAU4} on a fixed grid")
    lam = wavelength or particle.material.wavelength
    m = particle.mass
    frame = thermal_frame(grid, m, params.omega0, params.nbar, weight_tol)
    _check_edges(frame, "in the initial state")
    free_evolution(frame, m, params.tau1, "after step 1")
    v2 = pulse_potential(grid.x, params, m, lam, potential_mode)
    frame.diagnostics["pulse_mode"] = apply_pulse(frame, v2, m, params.tau2)
    free_evolution(frame, m, params.tau3, "after step 3")
    if params.omega4 > 0 and params.tau4 > 0:
        n = step4_steps or max(20, math.ceil(params.omega4 * params.tau4 / 2e-3))
        v4 = -0.5 * m * params.omega4 ** 2 * grid.x ** 2
        split_operator(frame, m, v4, params.tau4, n, "after step 4")
    return frame


def trap_evolution(frame: WavefunctionFrame, mass: float, omega: float, t: float,
                   steps: int) -> None:
    """Split-operator evolution in a harmonic trap (used for step 0)."""
    split_operator(frame, mass, 0.5 * mass * omega ** 2 * frame.grid.x ** 2, t, steps, "in the trap")


# -- analytic counterpart -----------------------------------------------------------------

def analytic_pattern(params: ProtocolParams, particle: Particle,
                     wavelength: float | None = None) -> FringePattern:
    """Closed-form unitary pattern with the exact map; mixedness enters as blur only."""
    m = particle.mass
    lam = wavelength or particle.material.wavelength
    st = state_after_step1(params, m)
    sx = math.sqrt(st.var_x)
    b = mapping_length(m, params.tau3, params.omega4, params.tau4, "exact")
    pulse = CubicPulse.from_params(params, lam)
    a3 = (3 * pulse.airy_rate(m, params.tau2)) ** (1 / 3)
    p = st.purity
    sigma01 = HBAR * math.sqrt(1 / p ** 2 - 1) / (2 * sx)
    return FringePattern(HBAR * b * a3, HBAR * b / (2 * sx), abs(b) * sigma01)


def l1_distance(x: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    return float(np.trapezoid(np.abs(a - b), x))


# -- second-moment dynamics ------------------------------------------------------------

def _stiffness(potential, mass: float) -> float:
    kind, *rest = (potential,) if isinstance(potential, str) else potential
    if kind == "free":
        return 0.0
    omega = float(rest[0])
    if kind == "harmonic":
        return mass * omega ** 2
    if kind == "inverted":
        return -mass * omega ** 2
    raise ValueError(f"unknown potential {potential!r}")


def moment_rhs(kappa: float, mass: float, lam: float):
    d = 2 * HBAR ** 2 * lam

    def f(_t, y):
        vx, c, vp = y
        return [2 * c / mass, vp / mass - kappa * vx, -2 * kappa * c + d]
    return f


def covariance_moments(var_x: float, cov_xp: float, var_p: float, lam: float, potential,
                       t: float, mass: float, method: str = "DOP853",
                       rk4_steps: int = 20000) -> tuple[float, float, float]:
    """(var_x, cov_xp, var_p) after time t under the localization master equation."""
    if t < 0:
        raise ValueError("t must be non-negative")
    y0 = np.array([var_x, cov_xp, var_p])
    if t == 0:
        return tuple(y0)
    f = moment_rhs(_stiffness(potential, mass), mass, lam)
    if method == "DOP853":
        # scale-aware absolute tolerances so each moment is held to rtol
        atol = 1e-14 * np.array([var_x, math.sqrt(var_x * var_p), var_p])
        sol = solve_ivp(f, (0, t), y0, method="DOP853", rtol=1e-10, atol=atol)
        if not sol.success:
            raise RuntimeError(sol.message)
        return tuple(sol.y[:, -1])
    if method == "rk4":
        h = t / rk4_steps
        y = y0.astype(float)
        for i in range(rk4_steps):
            s = i * h
            k1 = np.array(f(s, y))
            k2 = np.array(f(s + h / 2, y + h / 2 * k1))
            k3 = np.array(f(s + h / 2, y + h / 2 * k2))
            k4 = np.array(f(s + h, y + h * k3))
            y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        return tuple(y)
    raise ValueError(f"unknown method {method!r}")


def covariance_evolution(state: GaussianState, lam: float, potential, t: float, mass: float,
                         method: str = "DOP853") -> GaussianState:
    vx, c, vp = covariance_moments(state.var_x, state.cov_xp, state.var_p, lam, potential, t,
                                   mass, method)
    return GaussianState.from_moments(vx, c, vp)


# -- cross checks ------------------------------------------------------------------------

def convolution_cross_check(pattern: FringePattern, grid: Grid1D) -> float:
    """L1 distance between the Airy-convolution density and the theta-integral density."""
    u = grid.x / pattern.delta_x
    airy_form = decohered_density(FringePattern.canonical(pattern.p_c, pattern.p_lambda), u)
    theta_form = theta_density_scaled(u, pattern.p_c, pattern.p_lambda)
    return l1_distance(grid.x, airy_form / pattern.delta_x, theta_form / pattern.delta_x)


@dataclass(frozen=True)
class OracleCheck:
    name: str
    value: float
    tolerance: float
    passed: bool
    detail: str = ""

    def as_dict(self) -> dict:
        return dict(name=self.name, value=self.value, tolerance=self.tolerance,
                    passed=self.passed, detail=self.detail)


# ranges of the randomized battery: slow enough that a fixed grid holds the whole run
BATTERY_RADIUS = 50e-9
BATTERY_OMEGA0 = 2 * math.pi * 100e3
BATTERY_OMEGA4 = 2 * math.pi * 1e3
BATTERY_TAU2 = 10e-9


def _momentum_extent(params: ProtocolParams, particle: Particle, lam: float) -> float:
    """Generous bound on |p| reached during the run, from Gaussian moments."""
    m = particle.mass
    st = state_after_step1(params, m)
    vx, c, vp = st.var_x, st.cov_xp, st.var_p
    kick = m * params.omega2_sq * params.tau2
    vp2 = vp - 2 * kick * c + kick ** 2 * vx
    cubic = 3 * CubicPulse.from_params(params, lam).u3(m) * params.tau2 * 49 * vx
    a, s = position_gain(params.omega4, params.tau4), 0.0
    if params.omega4 > 0:
        s = math.sinh(params.omega4 * params.tau4)
    x3 = math.sqrt(vx) + math.sqrt(vp2) * params.tau3 / m
    p4 = a * math.sqrt(vp2) + m * params.omega4 * s * x3
    return 8 * max(math.sqrt(st.var_p), math.sqrt(vp2), p4) + cubic


def auto_grid(params: ProtocolParams, particle: Particle, wavelength: float | None = None,
              tail: float = 1e-12, max_points: int = 2 ** 18) -> Grid1D:
    """Smallest power-of-two grid covering every stage of a unitary run."""
    lam = wavelength or particle.material.wavelength
    m = particle.mass
    pat = analytic_pattern(params, particle, lam)
    st = state_after_step1(params, m)
    sx = math.sqrt(st.var_x)
    lo_pat = -(math.log(1 / tail) / (2 * pat.p_c ** 2) + 6) * pat.delta_x - 8 * pat.sigma_lambda
    hi_pat = (4 + 8 * pat.p_c) * pat.delta_x + 8 * pat.sigma_lambda
    # the pulsed state before the final map has at least the post-pulse size
    b3 = params.tau3 / m
    pre4 = analytic_pattern(replace(params, omega4=0.0, tau4=0.0), particle, lam)
    scale = b3 / mapping_length(m, params.tau3, params.omega4, params.tau4, "exact")
    lo = min(-8 * sx, lo_pat, lo_pat * scale)
    hi = max(8 * sx, hi_pat, hi_pat * scale, 8 * pre4.sigma_c)
    span = hi - lo
    lo -= 0.12 * span
    hi += 0.12 * span
    dx_mom = 0.8 * math.pi * HBAR / _momentum_extent(params, particle, lam)
    dx_pat = min(pat.sigma_c, pat.delta_x) / 20
    return Grid1D.covering(lo, hi, min(dx_mom, dx_pat), max_points)


DRAW_MAX_POINTS = 2 ** 17


def random_protocols(n: int, seed: int = 20240611, particle: Particle | None = None):
    """Seeded modest-parameter protocols with the exact mapping condition imposed.

    Returns (params, grid) pairs and the particle. Draws outside the shape
    window or needing more than DRAW_MAX_POINTS are skipped, so the list
    depends on the seed only.
    """
    particle = particle or particle_from_radius(BATTERY_RADIUS)
    rng = np.random.default_rng(seed)
    out = []
    attempts = 0
    while len(out) < n:
        attempts += 1
        if attempts > 200 * max(n, 1):
            raise RuntimeError("could not draw enough modest protocols")
        nbar = float(rng.uniform(0.0, 0.3))
        tau1 = float(rng.uniform(0.4e-3, 1.5e-3))
        tau3 = float(rng.uniform(10e-3, 30e-3))
        phi2 = float(rng.uniform(0.03, 0.12)) * math.pi
        tau4 = float(rng.uniform(0.0, 1.5)) / BATTERY_OMEGA4
        base = ProtocolParams(BATTERY_OMEGA0, nbar, 0.0, tau1, phi2, 1.0, BATTERY_TAU2,
                              tau3, BATTERY_OMEGA4, tau4)
        params = mapped_params(base, particle)
        pat = analytic_pattern(params, particle)
        if not 0.2 <= pat.p_c <= 1.0:
            continue
        try:
            extrema_positions(pat)
            grid = auto_grid(params, particle, max_points=DRAW_MAX_POINTS)
        except (GridInsufficient, NoFringesError):
            continue
        out.append((params, grid))
    return out, particle


def _run_one(args) -> tuple[float, dict]:
    params, particle, grid, corrupt, mode = args
    frame = propagate_protocol(params, particle, grid, mode)
    pat = analytic_pattern(params, particle)
    if corrupt != 1.0:
        pat = FringePattern(pat.delta_x * corrupt, pat.sigma_c, pat.sigma_lambda)
    ref = decohered_density(pat, grid.x)
    d = l1_distance(grid.x, frame.density, ref)
    info = dict(n_points=grid.n_points, p_c=pat.p_c, p_lambda=pat.p_lambda,
                omega4_tau4=params.omega4 * params.tau4, leakage=frame.diagnostics["leakage"],
                pulse_mode=frame.diagnostics["pulse_mode"],
                norm_drift=max(frame.diagnostics["norm_drift"]))
    return d, info


def oracle_battery(n_protocols: int = 10, seed: int = 20240611, corrupt_delta_x: float = 1.0,
                   workers: int = 1, max_points: int = 2 ** 17,
                   l1_tol: float = 2e-2) -> list[OracleCheck]:
    """Grid-vs-analytic checks, moment-ODE checks and Airy zeros.

    ``corrupt_delta_x`` scales the analytic fringe spacing, a sensitivity
    switch for debugging; GridInsufficient propagates to the caller.
    """
    checks = []
    protos, particle = random_protocols(n_protocols, seed)
    for _, g in protos:
        if g.n_points > max_points:
            raise GridInsufficient(f"battery needs {g.n_points} points, limit is {max_points}",
                                   float(g.n_points))
    jobs = [(p, particle, g, corrupt_delta_x, "polynomial") for p, g in protos]
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            results = list(ex.map(_run_one, jobs))
    else:
        results = [_run_one(j) for j in jobs]
    for i, (d, info) in enumerate(results):
        detail = ", ".join(f"{k}={v:.4g}" if isinstance(v, float) else f"{k}={v}"
                           for k, v in info.items())
        checks.append(OracleCheck(f"grid_vs_analytic_{i}", d, l1_tol, d <= l1_tol, detail))
    checks.extend(moment_checks(particle))
    for ref in (-2.33811, -4.08795):
        z = brentq(airy, ref - 0.05, ref + 0.05, xtol=1e-14)
        checks.append(OracleCheck(f"airy_zero_{ref}", abs(z - ref), 1e-4, abs(z - ref) <= 1e-4,
                                  f"root of airy() at {z:.9f}"))
    return checks


def moment_checks(particle: Particle, lam: float = 1e16, nbar: float = 0.5,
                  omega0: float = BATTERY_OMEGA0, tau1: float = 1e-3,
                  tol: float = 1e-6) -> list[OracleCheck]:
    """Moment ODE against the closed-form free-fall moments and purity."""
    m = particle.mass
    s0 = thermal_state(m, omega0, nbar)
    vx, c, vp = covariance_moments(s0.var_x, 0.0, s0.var_p, lam, "free", tau1, m)
    closed = free_fall_state(s0, m, tau1, lam)
    out = []
    for name, a, b in (("ode_var_x", vx, closed.var_x), ("ode_var_p", vp, closed.var_p),
                       ("ode_cov_xp", c, closed.cov_xp)):
        rel = abs(a - b) / abs(b)
        out.append(OracleCheck(name, rel, tol, rel <= tol))
    p_ode = HBAR / (2 * math.sqrt(vx * vp - c * c))
    p_approx = purity_after_free_fall(nbar, lam, tau1, math.sqrt(vx))
    rel = abs(p_ode - p_approx) / p_ode
    out.append(OracleCheck("ode_purity", rel, tol, rel <= tol,
                           f"omega0*tau1={omega0 * tau1:.3g}"))
    return out
