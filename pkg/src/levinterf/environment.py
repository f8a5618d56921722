"""Black-body heating and decoherence, internal temperature dynamics, residual gas."""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .core import AMU, C_LIGHT, KB, Particle

LOW_T_LIMIT = 100.0
TABLE_COLUMNS = ("T_K", "p_bb_W_per_m3", "gamma_bb_per_m5s")
LOW_T_UNITS_NOTE = ("low-temperature black-body formulas evaluated as W/m^3 and "
                    "1/(m^2 s m^3); unit reading is an assumption")
PLACEHOLDER_NAME = "placeholder_bb_silica.csv"


class TemperatureOutOfRange(ValueError):
    """A temperature outside the black-body model's coverage was requested."""


def pbb_lowT(T):
    """Extrapolated emitted power density below 100 K (W/m^3)."""
    T = np.asarray(T, dtype=float)
    if np.any(T <= 0):
        raise ValueError("temperature must be positive")
    if np.any(T > LOW_T_LIMIT):
        warnings.warn("low-temperature black-body formula used above 100 K", stacklevel=2)
    lt = np.log(T)
    out = T ** -5.79 * np.exp(3.14 * lt ** 2 - 0.265 * lt ** 3)
    return float(out) if out.ndim == 0 else out


def gammabb_lowT(T):
    """Extrapolated emission localization coefficient below 100 K (1/(m^2 s m^3))."""
    T = np.asarray(T, dtype=float)
    if np.any(T <= 0):
        raise ValueError("temperature must be positive")
    if np.any(T > LOW_T_LIMIT):
        warnings.warn("low-temperature black-body formula used above 100 K", stacklevel=2)
    lt = np.log(T)
    out = 1.91e31 * T ** 8.38 * np.exp(-0.19 * lt ** 2)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class BlackBodyModel:
    """Tabulated black-body quantities with optional low-temperature formulas.

    Tables are interpolated linearly in log-log space; requests outside the
    table are answered by the low-temperature formulas only below 100 K.
    """

    table: tuple = ()
    use_low_T_extrapolation: bool = True
    source: str = "none"
    conditional: bool = True
    _logs: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        rows = tuple(tuple(float(v) for v in r) for r in self.table)
        object.__setattr__(self, "table", rows)
        if rows:
            arr = np.array(rows)
            if arr.shape[1] != 3:
                raise ValueError("table rows need (T, p_bb, gamma_bb)")
            if np.any(np.diff(arr[:, 0]) <= 0):
                raise ValueError("table must be sorted strictly by temperature")
            if np.any(arr <= 0):
                raise ValueError("table values must be positive for log-log interpolation")
            object.__setattr__(self, "_logs", np.log(arr).T.copy())
        else:
            object.__setattr__(self, "_logs", np.empty((3, 0)))

    @property
    def has_table(self) -> bool:
        return bool(self.table)

    @property
    def t_range(self) -> tuple[float, float] | None:
        return (self.table[0][0], self.table[-1][0]) if self.table else None

    def _lookup(self, T: float, col: int, formula) -> float:
        if T <= 0:
            raise ValueError("temperature must be positive")
        if self.table:
            lo, hi = self.t_range
            if lo <= T <= hi:
                return float(np.exp(np.interp(math.log(T), self._logs[0], self._logs[col])))
        if T < LOW_T_LIMIT and self.use_low_T_extrapolation and (not self.table or T < self.t_range[0]):
            return float(formula(T))
        raise TemperatureOutOfRange(f"black-body data missing for T = {T:.6g} K")

    def p_bb(self, T: float) -> float:
        return self._lookup(T, 1, pbb_lowT)

    def gamma_bb(self, T: float) -> float:
        return self._lookup(T, 2, gammabb_lowT)

    @classmethod
    def from_rows(cls, rows, source: str, conditional: bool = True) -> "BlackBodyModel":
        return cls(tuple(sorted(tuple(r) for r in rows)), True, source, conditional)

    @classmethod
    def from_csv(cls, path: str | Path, conditional: bool = True) -> "BlackBodyModel":
        text = Path(path).read_text()
        return cls.from_rows(_parse_table(text, str(path)), str(path), conditional)

    @classmethod
    def placeholder(cls) -> "BlackBodyModel":
        text = resources.files("levinterf.data").joinpath(PLACEHOLDER_NAME).read_text()
        return cls.from_rows(_parse_table(text, PLACEHOLDER_NAME), "placeholder:" + PLACEHOLDER_NAME)

    @classmethod
    def low_temperature_only(cls) -> "BlackBodyModel":
        return cls((), True, "low-T formulas", True)


def _parse_table(text: str, name: str) -> list[tuple[float, float, float]]:
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    reader = csv.DictReader(io.StringIO("\n".join(lines)))
    if reader.fieldnames is None or tuple(f.strip() for f in reader.fieldnames) != TABLE_COLUMNS:
        raise ValueError(f"{name}: header must be {','.join(TABLE_COLUMNS)}")
    rows = []
    for i, row in enumerate(reader, 2):
        try:
            rows.append(tuple(float(row[c]) for c in TABLE_COLUMNS))
        except (TypeError, ValueError) as exc:
            raise ValueError(f"{name}: bad row {i}: {exc}") from None
    return rows


# -- heating ---------------------------------------------------------------------

def absorbed_power(particle: Particle, omega0: float, wavelength: float | None = None) -> float:
    if omega0 <= 0:
        raise ValueError("omega0 must be positive")
    k = 2 * math.pi / (wavelength or particle.material.wavelength)
    return particle.mass * omega0 ** 2 * C_LIGHT * particle.beta_abs / k


def steady_state_temperature(particle: Particle, bb: BlackBodyModel, T_e: float,
                             p_abs: float, duty: float = 1.0) -> float:
    """Temperature at which emission balances absorption plus (duty-weighted) laser heating."""
    target = duty * p_abs / particle.volume + bb.p_bb(T_e)
    f = lambda T: bb.p_bb(T) - target  # noqa: E731
    hi = T_e
    while f(hi) < 0:
        hi *= 1.5
    if hi == T_e:
        return T_e
    return brentq(f, T_e, hi, xtol=1e-9, rtol=1e-13)


@dataclass(frozen=True)
class ThermalHistory:
    time: tuple
    T_i: tuple
    runs_to_steady: int | None
    T_steady: float
    T_ss: float
    cycle_end: tuple

    def summary(self) -> dict:
        return dict(T_steady=self.T_steady, T_ss=self.T_ss, runs_to_steady=self.runs_to_steady,
                    T_final=self.T_i[-1], n_runs=len(self.cycle_end))


def internal_temperature_evolution(particle: Particle, bb: BlackBodyModel, T_e: float,
                                   tau0: float, tau_f: float, n_runs: int,
                                   p_abs: float, T_start: float | None = None,
                                   samples_per_segment: int = 4,
                                   tol_mK: float = 1.0) -> ThermalHistory:
    """Integrate the internal-temperature ODE over ``n_runs`` duty cycles.

    Each cycle is a dark interval ``tau_f`` (protocol) followed by ``tau0``
    of trapping light. The start value defaults to the continuous-wave
    steady state. ``T_steady`` is the time average over the last cycle.
    """
    if n_runs < 1 or tau0 < 0 or tau_f < 0:
        raise ValueError("need n_runs >= 1 and non-negative durations")
    heat_cap = particle.mass * particle.material.specific_heat
    vol = particle.volume
    T_ss = steady_state_temperature(particle, bb, T_e, p_abs)
    T = T_ss if T_start is None else T_start
    p_e = bb.p_bb(T_e)

    def rhs(power):
        return lambda t, y: [(power + vol * p_e - vol * bb.p_bb(y[0])) / heat_cap]

    times, temps, ends = [0.0], [T], []
    t0 = 0.0
    runs_to_steady = None
    last_avg = None
    for run in range(1, n_runs + 1):
        cycle_t, cycle_T = [t0], [T]
        for duration, power in ((tau_f, 0.0), (tau0, p_abs)):
            if duration == 0:
                continue
            grid = np.linspace(0, duration, samples_per_segment + 1)
            sol = solve_ivp(rhs(power), (0, duration), [T], method="RK45", t_eval=grid,
                            rtol=1e-8, atol=1e-9)
            if not sol.success:
                raise RuntimeError(sol.message)
            T = float(sol.y[0, -1])
            cycle_t.extend(t0 + grid[1:])
            cycle_T.extend(sol.y[0, 1:])
            t0 += duration
        times.extend(cycle_t[1:])
        temps.extend(cycle_T[1:])
        prev = ends[-1] if ends else None
        ends.append(T)
        last_avg = float(np.trapezoid(cycle_T, cycle_t) / (cycle_t[-1] - cycle_t[0]))
        if runs_to_steady is None and prev is not None and abs(T - prev) < tol_mK * 1e-3:
            runs_to_steady = run
    return ThermalHistory(tuple(times), tuple(temps), runs_to_steady, last_avg, T_ss, tuple(ends))


def duty_cycle_temperature(particle: Particle, bb: BlackBodyModel, T_e: float, tau0: float,
                           tau_f: float, p_abs: float) -> float:
    return steady_state_temperature(particle, bb, T_e, p_abs, tau0 / (tau0 + tau_f))


def bb_localization_rate(particle: Particle, bb: BlackBodyModel, T_i: float, T_e: float) -> float:
    return particle.volume * (bb.gamma_bb(T_i) + bb.gamma_bb(T_e))


# -- residual gas ------------------------------------------------------------------

H2_MASS = 2 * AMU


@dataclass(frozen=True)
class GasModel:
    temperature: float
    pressure: float
    gas_mass: float = H2_MASS

    def __post_init__(self):
        if not (self.temperature > 0 and self.pressure > 0 and self.gas_mass > 0):
            raise ValueError("gas temperature, pressure and mass must be positive")

    @property
    def mean_speed(self) -> float:
        return math.sqrt(8 * KB * self.temperature / (math.pi * self.gas_mass))


def gas_collision_rate(gas: GasModel, radius: float) -> float:
    return 8 * math.pi * gas.pressure * radius ** 2 / (gas.gas_mass * gas.mean_speed)


def no_collision_probability(gas: GasModel, radius: float, tau_f: float,
                             axis_only: bool = True) -> float:
    if tau_f < 0:
        raise ValueError("tau_f must be non-negative")
    rate = gas_collision_rate(gas, radius)
    return math.exp(-(rate / 3 if axis_only else rate) * tau_f)


def pressure_for_quantile(gas: GasModel, radius: float, tau_f: float, quantile: float,
                          axis_only: bool = True) -> float:
    """Pressure (Pa) at which a fraction ``quantile`` of runs sees no collision."""
    if not 0 < quantile < 1:
        raise ValueError("quantile must lie in (0, 1)")
    if tau_f <= 0:
        raise ValueError("tau_f must be positive")
    per_pa = gas_collision_rate(GasModel(gas.temperature, 1.0, gas.gas_mass), radius)
    if axis_only:
        per_pa /= 3
    return -math.log(quantile) / (per_pa * tau_f)
