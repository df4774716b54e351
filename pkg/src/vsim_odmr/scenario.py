"""Scenario files: schema, strict validation, defaults, and hashing.

A scenario is a TOML file with unit-suffixed keys (e.g. fwhm_ghz) grouped
in sections.  Unknown keys are rejected with the offending key path and
the expected unit; an empty file is valid and resolves to the shipped
defaults.  The resolved scenario hashes to a short hex digest that is
stamped into every output file so mixed outputs are detectable.

Two scenario files ship with the package: ``resonant.default`` and
``offresonant.default``.  The directory they are read from can be
overridden with the VSIM_ODMR_DEFAULTS environment variable.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import dataclass
from importlib import resources

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import defect_dynamics as dd
from . import ensemble as en
from . import spin_core as sc
from .constants import dbm_to_mw, wavelength_nm_to_freq_ghz
from .errors import SchemaError

ENV_DEFAULTS_DIR = "VSIM_ODMR_DEFAULTS"


@dataclass(frozen=True)
class Key:
    """One schema entry: python type, unit label, default, optional check."""

    type: type
    unit: str
    default: object
    check: object = None
    allowed: tuple = ()


def _vec3(name):
    def check(v):
        if not (isinstance(v, list) and len(v) == 3 and all(isinstance(x, (int, float)) for x in v)):
            raise SchemaError(f"{name}: expected a 3-vector of numbers")
        return [float(x) for x in v]

    return check


def _tones(name):
    def check(v):
        if not isinstance(v, list):
            raise SchemaError(f"{name}: expected a list of [freq_hz, amplitude_t] pairs")
        out = []
        for pair in v:
            if not (isinstance(pair, list) and len(pair) == 2):
                raise SchemaError(f"{name}: each tone must be [freq_hz, amplitude_t]")
            out.append([float(pair[0]), float(pair[1])])
        return out

    return check


def _floatlist(name):
    def check(v):
        if not (isinstance(v, list) and all(isinstance(x, (int, float)) for x in v)):
            raise SchemaError(f"{name}: expected a list of numbers")
        return [float(x) for x in v]

    return check


SCHEMA = {
    "field": {
        "b_mt": Key(list, "mT 3-vector", [0.0, 0.0, 0.75], _vec3("field.b_mt")),
    },
    "spin": {
        "g_factor": Key(float, "dimensionless", 2.0),
        "d_half_split_mhz": Key(float, "MHz", 35.0),
        "a_parallel_mhz": Key(float, "MHz", 9.5),
        "a_perp_mhz": Key(float, "MHz", 0.0),
        "satellite_weight": Key(float, "fraction in [0,1]", 0.10),
    },
    "optical": {
        "gamma_rad_per_s": Key(float, "1/s", 1.67e8),
        "k_isc_12_per_s": Key(float, "1/s", 1.5e8),
        "k_isc_32_per_s": Key(float, "1/s", 0.7e8),
        "branch_12": Key(float, "fraction in [0,1]", 0.70),
        "gamma_m_per_s": Key(float, "1/s", 5.0e6),
        "t1_s": Key(float, "s", 1.0e-3),
        "gamma_hom_mhz": Key(float, "MHz", 145.0),
        "delta_opt_ghz": Key(float, "GHz", 1.0),
        "detection_fraction": Key(float, "fraction in (0,1]", 0.05),
        "k_p_resonant_per_s_per_w": Key(float, "1/s per W", 1.35e11),
        "k_p_broadband_per_s_per_w": Key(float, "1/s per W", 6.0e5),
    },
    "rf": {
        "power_dbm": Key(float, "dBm", 3.0),
        "k_rf_per_s_per_sqrt_mw": Key(float, "1/s per sqrt(mW)", 2.4e5),
        "gamma2_per_s": Key(float, "1/s", 4.0e6),
        "drive_axis": Key(list, "unit 3-vector", [1.0, 0.0, 0.0], _vec3("rf.drive_axis")),
        "freq_min_mhz": Key(float, "MHz", 30.0),
        "freq_max_mhz": Key(float, "MHz", 110.0),
        "freq_step_mhz": Key(float, "MHz", 0.25),
        "weight_floor": Key(float, "dimensionless", 1.0e-9),
    },
    "ensemble": {
        "center_nm": Key(float, "nm", 916.49),
        "fwhm_ghz": Key(float, "GHz", 46.4),
        "quadrature_points": Key(int, "count", 401),
        "cutoff_sigmas": Key(float, "sigma multiples", 4.0),
    },
    "laser": {
        "mode": Key(str, "resonant|broadband", "resonant", allowed=("resonant", "broadband")),
        "power_w": Key(float, "W", 2.0e-6),
        "offset_ghz": Key(float, "GHz from ensemble center", 0.0),
        "mod_span_ghz": Key(float, "GHz peak-to-peak", 0.0),
        "mod_rate_khz": Key(float, "kHz", 5.0),
        "mod_points": Key(int, "count", 65),
        "ple_power_w": Key(float, "W", 1.0e-8),
    },
    "temperature": {
        "kind": Key(str, "activated|power-law", "activated", allowed=("activated", "power-law")),
        "sample_k": Key(float, "K", 4.0),
        "gamma0_mhz": Key(float, "MHz", 145.0),
        "pin_low_k": Key(float, "K", 26.0),
        "pin_low_mhz": Key(float, "MHz", 250.0),
        "pin_high_k": Key(float, "K", 60.0),
        "pin_high_mhz": Key(float, "MHz", 2.0e6),
        "exponent": Key(float, "dimensionless (power-law)", 5.0),
    },
    "sweep": {
        "powers_w": Key(
            list,
            "W list",
            [round(10.0 ** e, 12) for e in [-6 + 0.375 * i for i in range(13)]],
            _floatlist("sweep.powers_w"),
        ),
        "mod_spans_ghz": Key(list, "GHz list", [0.0, 0.5, 1.0, 2.0, 3.0, 5.0], _floatlist("sweep.mod_spans_ghz")),
        "temps_k": Key(
            list, "K list", [4.0, 10.0, 15.0, 20.0, 25.0, 30.0, 40.0, 50.0, 60.0], _floatlist("sweep.temps_k")
        ),
        "ple_halfspan_nm": Key(float, "nm", 0.4),
        "ple_step_nm": Key(float, "nm", 0.004),
    },
    "sensing": {
        "rf_power_dbm": Key(float, "dBm", 16.0),
        "power_resonant_w": Key(float, "W", 300.0e-6),
        "power_broadband_w": Key(float, "W", 30.0e-3),
        "slope_halfspan_mhz": Key(float, "MHz", 8.0),
        "slope_step_mhz": Key(float, "MHz", 0.05),
        "samples": Key(int, "output samples", 500_000),
        "detector_scale": Key(float, "counts/s per (photons/s/defect)", 1.0e6),
        "band_lo_hz": Key(float, "Hz", 1.0),
        "band_hi_hz": Key(float, "Hz", 10.0),
        "settle_time_constants": Key(float, "multiples of tau", 5.0),
        "injected_amp_t": Key(float, "T", 0.0),
        "injected_freq_hz": Key(float, "Hz", 5.0),
        "exact_poisson": Key(bool, "flag", False),
        "seed": Key(int, "RNG seed", 12345),
    },
    "sensing.lockin": {
        "ref_freq_hz": Key(float, "Hz", 900.0),
        "time_constant_s": Key(float, "s", 10.0e-3),
        "output_rate_hz": Key(float, "Hz", 1200.0),
        "internal_rate_hz": Key(float, "Hz", 21600.0),
    },
    "sensing.welch": {
        "segment_len": Key(int, "output samples", 16384),
        "overlap": Key(float, "fraction in [0,0.9]", 0.5),
        "window": Key(str, "window name", "hann", allowed=("hann",)),
    },
    "sensing.noise": {
        "photon_rate_per_s": Key(float, "1/s (0 = derive from scenario)", 0.0),
        "tones_resonant": Key(list, "[freq_hz, amp_t] pairs", [], _tones("sensing.noise.tones_resonant")),
        "tones_broadband": Key(
            list, "[freq_hz, amp_t] pairs", [[100.0, 5.0e-7]], _tones("sensing.noise.tones_broadband")
        ),
    },
}


class Section:
    """Attribute access onto a resolved scenario section."""

    def __init__(self, data: dict):
        self._data = dict(data)
        for k, v in data.items():
            setattr(self, k, v)

    def as_dict(self) -> dict:
        return dict(self._data)


def _resolve_section(path: str, schema: dict, raw: dict) -> dict:
    out = {}
    for key, spec in schema.items():
        if key in raw:
            val = raw.pop(key)
            if spec.check is not None:
                val = spec.check(val)
            elif spec.type is float and isinstance(val, int) and not isinstance(val, bool):
                val = float(val)
            elif spec.type is int and isinstance(val, bool):
                raise SchemaError(f"{path}.{key}: expected {spec.type.__name__} ({spec.unit})")
            if not isinstance(val, spec.type):
                raise SchemaError(f"{path}.{key}: expected {spec.type.__name__} ({spec.unit})")
            if spec.allowed and val not in spec.allowed:
                raise SchemaError(f"{path}.{key}: must be one of {spec.allowed}")
            out[key] = val
        else:
            out[key] = spec.default
    if raw:
        bad = next(iter(raw))
        known = ", ".join(sorted(schema))
        raise SchemaError(f"{path}.{bad}: unknown key (known keys: {known})")
    return out


class Scenario:
    """A fully resolved experiment description."""

    def __init__(self, resolved: dict, source: str = "<defaults>"):
        self._resolved = resolved
        self.source = source
        self.field = Section(resolved["field"])
        self.spin = Section(resolved["spin"])
        self.optical = Section(resolved["optical"])
        self.rf = Section(resolved["rf"])
        self.ensemble = Section(resolved["ensemble"])
        self.laser = Section(resolved["laser"])
        self.temperature = Section(resolved["temperature"])
        self.sweep = Section(resolved["sweep"])
        self.sensing = Section(resolved["sensing"])
        self.lockin = Section(resolved["sensing.lockin"])
        self.welch = Section(resolved["sensing.welch"])
        self.noise = Section(resolved["sensing.noise"])
        self._validate_consistency()

    def _validate_consistency(self) -> None:
        lk = self.lockin
        if lk.output_rate_hz >= lk.internal_rate_hz:
            raise SchemaError("sensing.lockin.output_rate_hz must be below internal_rate_hz")
        if lk.internal_rate_hz < 20.0 * lk.ref_freq_hz:
            raise SchemaError("sensing.lockin.internal_rate_hz must be >= 20x ref_freq_hz")
        if lk.time_constant_s <= 1.0 / lk.ref_freq_hz:
            raise SchemaError("sensing.lockin.time_constant_s must exceed 1/ref_freq_hz")
        if abs(lk.internal_rate_hz / lk.output_rate_hz - round(lk.internal_rate_hz / lk.output_rate_hz)) > 1e-9:
            raise SchemaError("sensing.lockin.internal_rate_hz must be an integer multiple of output_rate_hz")
        if not 0.0 <= self.welch.overlap <= 0.9:
            raise SchemaError("sensing.welch.overlap must lie in [0, 0.9]")
        if self.rf.freq_max_mhz <= self.rf.freq_min_mhz or self.rf.freq_step_mhz <= 0:
            raise SchemaError("rf frequency grid must have freq_min < freq_max and step > 0")

    # -- canonical form -----------------------------------------------------

    def as_dict(self) -> dict:
        return {sec: dict(vals) for sec, vals in sorted(self._resolved.items())}

    def canonical_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True, separators=(",", ":"))

    @property
    def hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()[:16]

    # -- physics builders ----------------------------------------------------

    def rates(self, gamma_hom_mhz: float | None = None) -> dd.RateParams:
        o = self.optical
        gamma = self.optical.gamma_hom_mhz if gamma_hom_mhz is None else gamma_hom_mhz
        return dd.RateParams(
            gamma_rad_per_s=o.gamma_rad_per_s,
            k_isc_12_per_s=o.k_isc_12_per_s,
            k_isc_32_per_s=o.k_isc_32_per_s,
            branch_12=o.branch_12,
            gamma_m_per_s=o.gamma_m_per_s,
            t1_s=o.t1_s,
            gamma_hom_hz=gamma * 1e6,
            delta_opt_hz=o.delta_opt_ghz * 1e9,
            detection_fraction=o.detection_fraction,
        )

    def zeeman(self) -> sc.ZeemanZfsParams:
        return sc.ZeemanZfsParams(
            g=self.spin.g_factor,
            d_half_split_mhz=self.spin.d_half_split_mhz,
            b_field_mt=tuple(self.field.b_mt),
        )

    def hyperfine(self) -> sc.HyperfineParams | None:
        if self.spin.satellite_weight == 0.0:
            return None
        return sc.HyperfineParams(
            a_parallel_mhz=self.spin.a_parallel_mhz,
            a_perp_mhz=self.spin.a_perp_mhz,
            satellite_weight=self.spin.satellite_weight,
        )

    def dist(self) -> en.InhomogeneousDist:
        return en.InhomogeneousDist(
            center_ghz=wavelength_nm_to_freq_ghz(self.ensemble.center_nm),
            fwhm_ghz=self.ensemble.fwhm_ghz,
        )

    def temperature_model(self) -> en.TemperatureModel:
        t = self.temperature
        if t.kind == "activated":
            return en.TemperatureModel.solve_activated(
                t.gamma0_mhz,
                (t.pin_low_k, t.pin_low_mhz),
                (t.pin_high_k, t.pin_high_mhz),
            )
        return en.TemperatureModel.solve_power_law(t.gamma0_mhz, t.exponent, (t.pin_low_k, t.pin_low_mhz))

    def rf_omega_per_s(self, power_dbm: float | None = None) -> float:
        p = self.rf.power_dbm if power_dbm is None else power_dbm
        return self.rf.k_rf_per_s_per_sqrt_mw * math.sqrt(dbm_to_mw(p))

    def w0_per_s(self, power_w: float | None = None, mode: str | None = None) -> float:
        mode = self.laser.mode if mode is None else mode
        p = self.laser.power_w if power_w is None else power_w
        k = (
            self.optical.k_p_resonant_per_s_per_w
            if mode == "resonant"
            else self.optical.k_p_broadband_per_s_per_w
        )
        return k * p

    def model(
        self,
        n_quadrature: int | None = None,
        rf_power_dbm: float | None = None,
        gamma_hom_mhz: float | None = None,
    ) -> en.EnsembleModel:
        return en.EnsembleModel(
            rates=self.rates(gamma_hom_mhz),
            zeeman=self.zeeman(),
            hyperfine=self.hyperfine(),
            dist=self.dist(),
            rf_omega_per_s=self.rf_omega_per_s(rf_power_dbm),
            rf_gamma2_per_s=self.rf.gamma2_per_s,
            drive_axis=tuple(self.rf.drive_axis),
            n_quadrature=self.ensemble.quadrature_points if n_quadrature is None else n_quadrature,
            cutoff_sigmas=self.ensemble.cutoff_sigmas,
            mod_points=self.laser.mod_points,
            weight_floor=self.rf.weight_floor,
        )

    def rf_grid_mhz(self):
        import numpy as np

        r = self.rf
        n = int(round((r.freq_max_mhz - r.freq_min_mhz) / r.freq_step_mhz)) + 1
        return np.linspace(r.freq_min_mhz, r.freq_min_mhz + (n - 1) * r.freq_step_mhz, n)


def resolve(raw: dict, source: str = "<dict>") -> Scenario:
    """Validate a raw mapping against the schema and fill defaults."""
    if not isinstance(raw, dict):
        raise SchemaError("scenario root must be a table")
    raw = {k: (dict(v) if isinstance(v, dict) else v) for k, v in raw.items()}
    resolved = {}
    # hoist nested sensing.* tables produced by TOML
    sensing_raw = raw.get("sensing", {})
    if not isinstance(sensing_raw, dict):
        raise SchemaError("sensing: expected a table")
    for sub in ("lockin", "welch", "noise"):
        key = f"sensing.{sub}"
        sub_raw = sensing_raw.pop(sub, {}) if isinstance(sensing_raw, dict) else {}
        if not isinstance(sub_raw, dict):
            raise SchemaError(f"{key}: expected a table")
        resolved[key] = _resolve_section(key, SCHEMA[key], dict(sub_raw))
    for section, schema in SCHEMA.items():
        if "." in section:
            continue
        sec_raw = raw.pop(section, {})
        if not isinstance(sec_raw, dict):
            raise SchemaError(f"{section}: expected a table")
        resolved[section] = _resolve_section(section, schema, dict(sec_raw))
    raw.pop("sensing", None)
    if raw:
        bad = next(iter(raw))
        known = ", ".join(sorted(k for k in SCHEMA if "." not in k))
        raise SchemaError(f"{bad}: unknown section (known sections: {known})")
    return Scenario(resolved, source=source)


def defaults_dir_candidates():
    env = os.environ.get(ENV_DEFAULTS_DIR)
    if env:
        yield env
    yield str(resources.files("vsim_odmr") / "defaults")


def load_scenario(path: str) -> Scenario:
    """Load and validate a scenario file.

    Bare default names (e.g. 'resonant.default') are looked up in the
    defaults directory; anything else must be an existing file path.
    """
    candidate = path
    if not os.path.exists(candidate) and os.sep not in path:
        for d in defaults_dir_candidates():
            p = os.path.join(d, path)
            if os.path.exists(p):
                candidate = p
                break
    if not os.path.exists(candidate):
        raise FileNotFoundError(f"scenario file not found: {path}")
    with open(candidate, "rb") as fh:
        try:
            raw = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise SchemaError(f"{path}: not valid TOML: {exc}") from exc
    return resolve(raw, source=str(candidate))


def default_scenario(name: str = "resonant.default") -> Scenario:
    return load_scenario(name)
