"""Scenario configuration: mission timeline, radar, link and threshold parameters.

Scenario files are TOML with four sections (``[mission]``, ``[radar]``,
``[comm]``, ``[thresholds]``).  Every numeric field accepts either a bare
number (already SI-linear) or a string ``"<value> <unit>"``; the loader
converts everything to SI-linear once, so downstream modules never see dB.

Unit rules
----------
dB, dBi, dBsm, dBm2   10**(v/10), dimensionless (dBm2 is read as a
                      normalized backscatter ratio, not an area)
dBm                   10**(v/10) * 1e-3 W
dBW                   10**(v/10) W
dB/mW                 10**(v/10) * 1e3, per-watt basis for a gain quoted
                      against a milliwatt reference
deg / rad             radians
Hz kHz MHz GHz        hertz
W mW kW, J kJ mJ      watts, joules
bit/s kbit/s Mbit/s   bits per second (bps, kbps, Mbps also accepted)
m km, s ms, m/s, K    SI
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import re
import warnings
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

import numpy as np
import tomli_w

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

SPEED_OF_LIGHT = 299792458.0
BOLTZMANN = 1.380649e-23


class ScenarioError(ValueError):
    """Malformed or invalid scenario input."""


# unit -> (family, multiplier or callable)
_LINEAR_UNITS: dict[str, tuple[str, float]] = {
    "": ("any", 1.0),
    "W": ("power", 1.0),
    "mW": ("power", 1e-3),
    "kW": ("power", 1e3),
    "J": ("energy", 1.0),
    "mJ": ("energy", 1e-3),
    "kJ": ("energy", 1e3),
    "Hz": ("frequency", 1.0),
    "kHz": ("frequency", 1e3),
    "MHz": ("frequency", 1e6),
    "GHz": ("frequency", 1e9),
    "m": ("length", 1.0),
    "km": ("length", 1e3),
    "s": ("time", 1.0),
    "ms": ("time", 1e-3),
    "m/s": ("speed", 1.0),
    "K": ("temperature", 1.0),
    "deg": ("angle", math.pi / 180.0),
    "rad": ("angle", 1.0),
    "bit/s": ("rate", 1.0),
    "bps": ("rate", 1.0),
    "kbit/s": ("rate", 1e3),
    "kbps": ("rate", 1e3),
    "Mbit/s": ("rate", 1e6),
    "Mbps": ("rate", 1e6),
    "Gbit/s": ("rate", 1e9),
}

_LOG_UNITS: dict[str, tuple[str, float]] = {
    "dB": ("ratio", 1.0),
    "dBi": ("ratio", 1.0),
    "dBsm": ("ratio", 1.0),
    "dBm2": ("ratio", 1.0),
    "dBm²": ("ratio", 1.0),
    "dBm": ("power", 1e-3),
    "dBW": ("power", 1.0),
    "dB/mW": ("per_power", 1e3),
}

_QUANTITY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(\S*)\s*$")


def parse_quantity(value: Any, family: str, field: str = "value") -> float:
    """Convert a bare number or a ``"<number> <unit>"`` string to SI-linear.

    ``family`` restricts which units are accepted for the field; bare
    numbers are always taken as already SI-linear.
    """
    if isinstance(value, bool):
        raise ScenarioError(f"{field}: expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if not isinstance(value, str):
        raise ScenarioError(f"{field}: expected a number or quantity string, got {value!r}")
    m = _QUANTITY.match(value)
    if m is None:
        raise ScenarioError(f"{field}: cannot parse quantity {value!r}")
    number, unit = float(m.group(1)), m.group(2)
    if unit in _LOG_UNITS:
        fam, mult = _LOG_UNITS[unit]
        converted = 10.0 ** (number / 10.0) * mult
    elif unit in _LINEAR_UNITS:
        fam, mult = _LINEAR_UNITS[unit]
        converted = number * mult
    else:
        raise ScenarioError(f"{field}: unknown unit {unit!r}")
    allowed = {family, "any"}
    if family == "ratio":
        allowed.add("ratio")
    if family == "per_power":
        allowed.add("ratio")
    if fam not in allowed:
        raise ScenarioError(f"{field}: unit {unit!r} is a {fam} unit, expected {family}")
    return converted


@dataclass(frozen=True)
class MissionConfig:
    num_slots: int
    slot_duration: float
    velocity: tuple[float, ...]
    target_x: float
    ground_station: tuple[float, float, float]

    @property
    def v_y(self) -> np.ndarray:
        return np.asarray(self.velocity, dtype=float)

    @property
    def track_length(self) -> float:
        """Total along-track distance flown, ``dt * sum(v_y)``."""
        return self.slot_duration * float(np.sum(self.v_y))


@dataclass(frozen=True)
class RadarParams:
    sigma0: float
    p_t: float
    g_t: float
    g_r: float
    wavelength: float
    tau_prf: float
    t_sys: float
    b_rg: float
    noise_factor: float
    l_atm: float
    l_sys: float
    l_az: float
    f0: float
    theta_d: float
    theta_3db: float

    @property
    def b_p(self) -> float:
        """Fractional bandwidth B_rg / f0."""
        return self.b_rg / self.f0

    @property
    def theta_near(self) -> float:
        return self.theta_d - self.theta_3db / 2.0

    @property
    def theta_far(self) -> float:
        return self.theta_d + self.theta_3db / 2.0


@dataclass(frozen=True)
class CommParams:
    bandwidth: tuple[float, float]
    gamma: float
    p_com_max: float
    r_min: tuple[float, float]
    e_com: float


@dataclass(frozen=True)
class Thresholds:
    z_min: float
    z_max: float
    b_min: float
    gamma_snr_min: float
    gamma_rg_min: float
    h_amb_min: float
    h_amb_max: float


@dataclass(frozen=True)
class ScenarioConfig:
    mission: MissionConfig
    radar: RadarParams
    comm: CommParams
    thresholds: Thresholds


# file key -> (dataclass attribute, unit family)
_MISSION_KEYS = {
    "N": ("num_slots", "count"),
    "delta_t": ("slot_duration", "time"),
    "v_y": ("velocity", "speed"),
    "x_t": ("target_x", "length"),
    "x_g": (None, "length"),
    "y_g": (None, "length"),
    "z_g": (None, "length"),
}
_RADAR_KEYS = {
    "sigma0": ("sigma0", "ratio"),
    "P_t": ("p_t", "power"),
    "G_t": ("g_t", "ratio"),
    "G_r": ("g_r", "ratio"),
    "lambda": ("wavelength", "length"),
    "tau_prf": ("tau_prf", "ratio"),
    "T_sys": ("t_sys", "temperature"),
    "B_rg": ("b_rg", "frequency"),
    "F": ("noise_factor", "ratio"),
    "L_atm": ("l_atm", "ratio"),
    "L_sys": ("l_sys", "ratio"),
    "L_az": ("l_az", "ratio"),
    "f0": ("f0", "frequency"),
    "theta_d": ("theta_d", "angle"),
    "theta_3dB": ("theta_3db", "angle"),
}
_COMM_KEYS = {
    "B_c": ("bandwidth", "frequency"),
    "gamma": ("gamma", "per_power"),
    "P_com_max": ("p_com_max", "power"),
    "R_min": ("r_min", "rate"),
    "E_com": ("e_com", "energy"),
}
_THRESHOLD_KEYS = {
    "z_min": ("z_min", "length"),
    "z_max": ("z_max", "length"),
    "b_min": ("b_min", "length"),
    "gamma_snr_min": ("gamma_snr_min", "ratio"),
    "gamma_rg_min": ("gamma_rg_min", "ratio"),
    "h_amb_min": ("h_amb_min", "length"),
    "h_amb_max": ("h_amb_max", "length"),
}
_SECTIONS = {
    "mission": _MISSION_KEYS,
    "radar": _RADAR_KEYS,
    "comm": _COMM_KEYS,
    "thresholds": _THRESHOLD_KEYS,
}


def _require(section: Mapping[str, Any], name: str, key: str) -> Any:
    if key not in section:
        raise ScenarioError(f"{name}.{key}: missing field")
    return section[key]


def _pair(raw: Any, family: str, field: str) -> tuple[float, float]:
    if isinstance(raw, list):
        if len(raw) != 2:
            raise ScenarioError(f"{field}: expected a scalar or two entries, got {len(raw)}")
        return parse_quantity(raw[0], family, field), parse_quantity(raw[1], family, field)
    v = parse_quantity(raw, family, field)
    return v, v


def scenario_from_dict(data: Mapping[str, Any]) -> ScenarioConfig:
    """Build and validate a scenario from the parsed file layout."""
    for name in _SECTIONS:
        if name not in data or not isinstance(data[name], Mapping):
            raise ScenarioError(f"{name}: missing section")
    for name, keys in _SECTIONS.items():
        unknown = set(data[name]) - set(keys)
        if unknown:
            raise ScenarioError(f"{name}.{sorted(unknown)[0]}: unknown field")

    m = data["mission"]
    n_raw = _require(m, "mission", "N")
    if isinstance(n_raw, bool) or not isinstance(n_raw, int):
        raise ScenarioError(f"mission.N: expected an integer slot count, got {n_raw!r}")
    v_raw = _require(m, "mission", "v_y")
    if isinstance(v_raw, list):
        velocity = tuple(parse_quantity(v, "speed", "mission.v_y") for v in v_raw)
        if len(velocity) != n_raw:
            raise ScenarioError(f"mission.v_y: expected {n_raw} entries, got {len(velocity)}")
    else:
        velocity = (parse_quantity(v_raw, "speed", "mission.v_y"),) * max(n_raw, 0)
    mission = MissionConfig(
        num_slots=n_raw,
        slot_duration=parse_quantity(_require(m, "mission", "delta_t"), "time", "mission.delta_t"),
        velocity=velocity,
        target_x=parse_quantity(_require(m, "mission", "x_t"), "length", "mission.x_t"),
        ground_station=tuple(
            parse_quantity(_require(m, "mission", k), "length", f"mission.{k}")
            for k in ("x_g", "y_g", "z_g")
        ),
    )

    r = data["radar"]
    radar = RadarParams(**{
        attr: parse_quantity(_require(r, "radar", key), fam, f"radar.{key}")
        for key, (attr, fam) in _RADAR_KEYS.items()
    })

    c = data["comm"]
    comm = CommParams(
        bandwidth=_pair(_require(c, "comm", "B_c"), "frequency", "comm.B_c"),
        gamma=parse_quantity(_require(c, "comm", "gamma"), "per_power", "comm.gamma"),
        p_com_max=parse_quantity(_require(c, "comm", "P_com_max"), "power", "comm.P_com_max"),
        r_min=_pair(_require(c, "comm", "R_min"), "rate", "comm.R_min"),
        e_com=parse_quantity(_require(c, "comm", "E_com"), "energy", "comm.E_com"),
    )

    t = data["thresholds"]
    thresholds = Thresholds(**{
        attr: parse_quantity(_require(t, "thresholds", key), fam, f"thresholds.{key}")
        for key, (attr, fam) in _THRESHOLD_KEYS.items()
    })

    scenario = ScenarioConfig(mission, radar, comm, thresholds)
    validate(scenario)
    return scenario


def validate(s: ScenarioConfig) -> None:
    """Raise ScenarioError naming the first violated invariant."""
    m, r, c, t = s.mission, s.radar, s.comm, s.thresholds
    checks = [
        (m.num_slots >= 1, "mission.N", f"must be >= 1, got {m.num_slots}"),
        (m.slot_duration > 0, "mission.delta_t", f"must be > 0, got {m.slot_duration}"),
        (all(v > 0 for v in m.velocity), "mission.v_y", "every entry must be > 0"),
        (all(math.isfinite(v) for v in (m.target_x, *m.ground_station)),
         "mission.x_t/x_g/y_g/z_g", "must be finite"),
    ]
    for key, (attr, _) in _RADAR_KEYS.items():
        if attr in ("theta_d", "theta_3db"):
            continue
        val = getattr(r, attr)
        checks.append((val > 0 and math.isfinite(val), f"radar.{key}", f"must be > 0, got {val}"))
    checks += [
        (0 < r.theta_3db < math.pi, "radar.theta_3dB", "must lie in (0, pi)"),
        (0 < r.theta_d < math.pi / 2, "radar.theta_d", "must lie in (0, pi/2)"),
        (r.theta_d > r.theta_3db / 2, "radar.theta_d/theta_3dB",
         "near edge of the beam must stay side-looking (theta_d > theta_3dB/2)"),
        (r.theta_far < math.pi / 2, "radar.theta_d/theta_3dB",
         "far edge of the beam must stay below the horizon"),
        (all(b > 0 for b in c.bandwidth), "comm.B_c", "must be > 0"),
        (c.gamma > 0, "comm.gamma", "must be > 0"),
        (c.p_com_max > 0, "comm.P_com_max", "must be > 0"),
        (all(v > 0 for v in c.r_min), "comm.R_min", "must be > 0"),
        (c.e_com > 0, "comm.E_com", "must be > 0"),
        (t.z_min > 0, "thresholds.z_min", f"must be > 0, got {t.z_min}"),
        (t.z_min < t.z_max, "thresholds.z_min/z_max",
         f"z_min ({t.z_min}) must be < z_max ({t.z_max})"),
        (t.b_min > 0, "thresholds.b_min", f"must be > 0, got {t.b_min}"),
        (0 < t.gamma_snr_min < 1, "thresholds.gamma_snr_min", "must lie in (0, 1)"),
        (0 < t.gamma_rg_min < 1, "thresholds.gamma_rg_min", "must lie in (0, 1)"),
        (t.h_amb_min > 0, "thresholds.h_amb_min", f"must be > 0, got {t.h_amb_min}"),
        (t.h_amb_min < t.h_amb_max, "thresholds.h_amb_min/h_amb_max",
         f"h_amb_min ({t.h_amb_min}) must be < h_amb_max ({t.h_amb_max})"),
    ]
    for ok, field, msg in checks:
        if not ok:
            raise ScenarioError(f"{field}: {msg}")
    if r.b_p > 1:
        warnings.warn(
            f"fractional bandwidth B_rg/f0 = {r.b_p:.3g} exceeds 1; accepted as configured",
            stacklevel=3,
        )


def loads_scenario(text: str) -> ScenarioConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioError(f"malformed scenario file: {exc}") from exc
    return scenario_from_dict(data)


def load_scenario(path: str | Path) -> ScenarioConfig:
    """Load and validate a scenario file (see module docstring for units)."""
    text = Path(path).read_text(encoding="utf-8")
    return loads_scenario(text)


def bundled_scenario_path(name: str = "table1.scenario") -> Path:
    return Path(str(resources.files("insarfopt") / "data" / name))


def reference_scenario() -> ScenarioConfig:
    """The bundled reference parameter set."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return load_scenario(bundled_scenario_path())


def scenario_to_dict(s: ScenarioConfig) -> dict[str, dict[str, Any]]:
    """SI-linear file layout; loading it back yields identical values."""
    m, c = s.mission, s.comm
    uniform = len(set(m.velocity)) == 1
    return {
        "mission": {
            "N": m.num_slots,
            "delta_t": m.slot_duration,
            "v_y": m.velocity[0] if uniform else list(m.velocity),
            "x_t": m.target_x,
            "x_g": m.ground_station[0],
            "y_g": m.ground_station[1],
            "z_g": m.ground_station[2],
        },
        "radar": {key: getattr(s.radar, attr) for key, (attr, _) in _RADAR_KEYS.items()},
        "comm": {
            "B_c": list(c.bandwidth),
            "gamma": c.gamma,
            "P_com_max": c.p_com_max,
            "R_min": list(c.r_min),
            "E_com": c.e_com,
        },
        "thresholds": {key: getattr(s.thresholds, attr) for key, (attr, _) in _THRESHOLD_KEYS.items()},
    }


def dumps_scenario(s: ScenarioConfig) -> str:
    return tomli_w.dumps(scenario_to_dict(s))


def save_scenario(s: ScenarioConfig, path: str | Path) -> None:
    Path(path).write_text(dumps_scenario(s), encoding="utf-8")


def fingerprint(s: ScenarioConfig) -> str:
    """Stable hash of the SI-linear scenario content."""
    blob = json.dumps(scenario_to_dict(s), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def with_overrides(s: ScenarioConfig, overrides: Mapping[str, Any]) -> ScenarioConfig:
    """Return a copy with ``{"section.key": value}`` overrides applied.

    Values go through the same unit parser as the file loader.
    """
    data = scenario_to_dict(s)
    for dotted, value in overrides.items():
        section, _, key = dotted.partition(".")
        if section not in _SECTIONS or key not in _SECTIONS[section]:
            raise ScenarioError(f"{dotted}: unknown scenario field")
        data[section][key] = value
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return scenario_from_dict(data)


def along_track_positions(m: MissionConfig) -> np.ndarray:
    """Along-track position per slot; y[0] = 0, y[n+1] = y[n] + v_y[n] dt."""
    steps = m.v_y[:-1] * m.slot_duration
    return np.concatenate(([0.0], np.cumsum(steps)))


def radar_constants(s: ScenarioConfig) -> np.ndarray:
    """Per-slot radar constant c_n (units m^3), so that SNR = c_n / range^3-type terms."""
    r = s.radar
    numerator = (r.sigma0 * r.p_t * r.g_t * r.g_r * r.wavelength ** 3
                 * SPEED_OF_LIGHT * r.tau_prf)
    noise = BOLTZMANN * r.t_sys * r.b_rg * r.noise_factor * r.l_atm * r.l_sys * r.l_az
    return numerator / (4.0 ** 4 * math.pi ** 3 * s.mission.v_y * noise)


def radar_constant(s: ScenarioConfig, n: int) -> float:
    """Radar constant for slot ``n`` (0-based)."""
    if not 0 <= n < s.mission.num_slots:
        raise IndexError(f"slot {n} outside 0..{s.mission.num_slots - 1}")
    return float(radar_constants(s)[n])


def replace(s: ScenarioConfig, **sections: Any) -> ScenarioConfig:
    """dataclasses.replace with re-validation."""
    out = dataclasses.replace(s, **sections)
    validate(out)
    return out
