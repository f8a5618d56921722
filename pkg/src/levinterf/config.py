"""Flat key = value scenario files with unit-suffixed keys.

Frequencies given as ``*_khz`` are ordinary frequencies f = omega / 2 pi.
Angles ``*_pi`` are in units of pi. Pressures are accepted in mbar and
converted to Pa once, here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

from .core import SILICA, Material, Particle
from .protocol import ProtocolParams

MBAR = 100.0
TWO_PI = 2 * math.pi


class ConfigError(ValueError):
    """One or more problems in a scenario file; ``problems`` lists all of them."""

    def __init__(self, problems: list[str]):
        super().__init__("invalid configuration:\n  " + "\n  ".join(problems))
        self.problems = list(problems)


@dataclass(frozen=True)
class Key:
    kind: str            # float, int, str, floats
    scale: float = 1.0   # multiply to obtain SI
    default: object = None
    positive: bool = False
    note: str = ""


KEYS: dict[str, Key] = {
    # particle
    "radius_nm": Key("float", 1e-9, 50.0, True),
    "density_kg_m3": Key("float", 1.0, SILICA.density, True),
    "specific_heat_j_per_kg_k": Key("float", 1.0, SILICA.specific_heat, True),
    "refractive_index_re": Key("float", 1.0, SILICA.refractive_index_re, True),
    "refractive_index_im": Key("float", 1.0, SILICA.refractive_index_im, True),
    "wavelength_nm": Key("float", 1e-9, SILICA.wavelength * 1e9, True),
    # protocol
    "omega0_khz": Key("float", TWO_PI * 1e3, 100.0, True),
    "nbar": Key("float", 1.0, 0.5),
    "tau0_ms": Key("float", 1e-3, 2.0),
    "tau1_ms": Key("float", 1e-3, None, True),
    "phi2_pi": Key("float", math.pi, None, True),
    "omega2_khz": Key("float", TWO_PI * 1e3, None, True,
                      "harmonic stiffness of the pulse; omitted -> exact mapping condition"),
    "tau2_us": Key("float", 1e-6, 10.0, True),
    "tau3_ms": Key("float", 1e-3, None, True),
    "omega4_khz": Key("float", TWO_PI * 1e3, 10.0),
    "tau4_ms": Key("float", 1e-3, 0.0),
    "sigma5_nm": Key("float", 1e-9, 0.0),
    "mapping": Key("str", 1.0, "asymptotic"),
    # environment
    "T_e_K": Key("float", 1.0, 300.0, True),
    "pressure_mbar": Key("float", MBAR, None, True),
    "gas_mass_amu": Key("float", 1.0, 2.0, True),
    "bb_table": Key("str", 1.0, None),
    "quantile": Key("float", 1.0, 0.9, True),
    # run options
    "m_sigma": Key("float", 1.0, 5.0, True),
    "pattern_points": Key("int", 1.0, 2001, True),
    "tau_f_ms": Key("float", 1e-3, None, True),
    "q_target": Key("float", 1.0, 0.005, True),
    "fringe_target_nm": Key("float", 1e-9, 5.0, True),
    "g1_min": Key("float", 1.0, 0.95, True),
    "n_runs": Key("int", 1.0, 400, True),
    "grid_tau": Key("int", 1.0, 40, True),
    "grid_phi": Key("int", 1.0, 40, True),
    "sweep_param": Key("str", 1.0, None),
    "sweep_values": Key("floats", 1.0, None),
    "objective": Key("str", 1.0, "coherence_length"),
    "oracle_protocols": Key("int", 1.0, 10, True),
    "oracle_seed": Key("int", 1.0, 20240611),
    "oracle_max_points": Key("int", 1.0, 2 ** 17, True),
    "oracle_corrupt_delta_x": Key("float", 1.0, 1.0, True,
                                  "debug: scales the analytic fringe spacing"),
    "l1_tol": Key("float", 1.0, 2e-2, True),
}

SWEEPABLE = {"radius_nm", "T_e_K", "tau_f_ms"}
MAPPING_MODES = {"asymptotic", "exact"}


@dataclass(frozen=True)
class ScenarioConfig:
    """Validated config: ``raw`` holds the file's values, ``si`` SI-converted ones."""

    raw: dict
    si: dict
    source: str = "<memory>"
    defaults_used: tuple = field(default=())

    def get(self, key: str):
        return self.si.get(key, _default_si(key))

    def has(self, key: str) -> bool:
        return key in self.si

    def material(self) -> Material:
        return Material(self.get("density_kg_m3"), self.get("specific_heat_j_per_kg_k"),
                        self.get("refractive_index_re"), self.get("refractive_index_im"),
                        self.get("wavelength_nm"))

    def particle(self) -> Particle:
        return Particle(self.get("radius_nm"), self.material())

    def protocol(self) -> ProtocolParams:
        """Protocol with omega_p from omega2 when given, else a placeholder of 1."""
        phi2 = self.get("phi2_pi")
        wp = 1.0
        if self.has("omega2_khz"):
            wp = ProtocolParams.omega_p_for(self.get("omega2_khz") ** 2, phi2)
        return ProtocolParams(self.get("omega0_khz"), self.get("nbar"), self.get("tau0_ms"),
                              self.get("tau1_ms"), phi2, wp, self.get("tau2_us"),
                              self.get("tau3_ms"), self.get("omega4_khz"), self.get("tau4_ms"),
                              self.get("sigma5_nm"))

    def echo(self) -> dict:
        return dict(self.raw)


def _default_si(key: str):
    k = KEYS[key]
    if k.default is None or k.kind in ("str", "floats"):
        return k.default
    return k.default * k.scale if k.kind == "float" else k.default


def _convert(key: str, text: str, problems: list[str], where: str):
    k = KEYS[key]
    try:
        if k.kind == "float":
            v = float(text)
            if not math.isfinite(v):
                raise ValueError("not finite")
        elif k.kind == "int":
            v = int(text)
        elif k.kind == "floats":
            v = [float(t) for t in text.replace(",", " ").split()] if text.strip() else []
        else:
            v = text
    except ValueError:
        problems.append(f"{where}: {key} = {text!r} is not a valid {k.kind}")
        return None
    if k.positive and k.kind in ("float", "int") and not v > 0:
        problems.append(f"{where}: {key} must be positive")
    elif k.kind in ("float", "int") and v < 0:
        problems.append(f"{where}: {key} must be non-negative")
    return v


def parse_config(text: str, source: str = "<memory>",
                 required: tuple = ()) -> ScenarioConfig:
    """Parse and validate; every problem is collected before raising."""
    problems: list[str] = []
    raw: dict = {}
    si: dict = {}
    seen: set = set()
    for no, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        where = f"{source}:{no}"
        if "=" not in body:
            problems.append(f"{where}: expected 'key = value'")
            continue
        key, value = (s.strip() for s in body.split("=", 1))
        if key not in KEYS:
            problems.append(f"{where}: unknown key {key!r}")
            continue
        if key in seen:
            problems.append(f"{where}: duplicate key {key!r}")
            continue
        seen.add(key)
        v = _convert(key, value, problems, where)
        if v is None:
            continue
        raw[key] = v
        k = KEYS[key]
        si[key] = v * k.scale if k.kind == "float" else v
    for key in required:
        if key not in seen and KEYS[key].default is None:
            problems.append(f"{source}: missing required key {key!r}")
    if "mapping" in raw and raw["mapping"] not in MAPPING_MODES:
        problems.append(f"{source}: mapping must be one of {sorted(MAPPING_MODES)}")
    if "phi2_pi" in raw and not 0 < raw["phi2_pi"] < 0.25:
        problems.append(f"{source}: phi2_pi must lie in (0, 0.25)")
    if "sweep_param" in raw and raw["sweep_param"] not in SWEEPABLE:
        problems.append(f"{source}: sweep_param must be one of {sorted(SWEEPABLE)}")
    if "objective" in raw and raw["objective"] not in ("coherence_length", "splitting"):
        problems.append(f"{source}: objective must be coherence_length or splitting")
    if "refractive_index_re" in raw and raw["refractive_index_re"] <= 1:
        problems.append(f"{source}: refractive_index_re must exceed 1")
    if problems:
        raise ConfigError(problems)
    used = tuple(k for k in KEYS if k not in raw)
    return ScenarioConfig(raw, si, source, used)


def load_config(path: str | Path, required: tuple = ()) -> ScenarioConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError([f"{path}: cannot read ({exc.strerror})"]) from None
    return parse_config(text, str(p), required)
