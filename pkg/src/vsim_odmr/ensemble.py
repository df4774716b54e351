"""Ensemble integration over the inhomogeneous ZPL distribution.

Defect classes are one-dimensional in optical detuning: each class sees
the laser at a different detuning drawn from a Gaussian distribution of
zero-phonon-line center frequencies.  The class grid is warped (sinh
spacing) so the narrow resonant response near the laser line is resolved
with a few hundred points while the Gaussian wings stay covered.

The hyperfine satellite structure is handled as three sub-ensembles: a
fraction satellite_weight of defects carries a coupled nucleus frozen in
m_i = +1/2 or -1/2, which shifts that defect's RF lines by +-a_par/2; the
rest use the bare line table.  Optical rates are assumed identical across
the branches.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import defect_dynamics as dd
from . import spin_core as sc
from .constants import MHZ_PER_UEV  # noqa: F401  (re-exported for unit tests)
from .errors import DegenerateGeneratorError, NumericalError

FWHM_TO_SIGMA = 1.0 / (2.0 * math.sqrt(2.0 * math.log(2.0)))
GAUSS_PEAK_FACTOR = 2.0 * math.sqrt(math.log(2.0) / math.pi)  # unit-area peak * FWHM


@dataclass
class InhomogeneousDist:
    """Gaussian distribution of ZPL center frequencies, FWHM in GHz."""

    center_ghz: float
    fwhm_ghz: float

    def validate(self) -> None:
        if self.fwhm_ghz <= 0:
            raise ValueError("fwhm_ghz must be > 0")

    @property
    def sigma_ghz(self) -> float:
        return self.fwhm_ghz * FWHM_TO_SIGMA


@dataclass
class TemperatureModel:
    """Homogeneous-linewidth growth with temperature.

    kind 'activated':  Gamma(T) = gamma0 + amplitude * exp(-Ea / kB T)
    kind 'power-law':  Gamma(T) = gamma0 + amplitude * (T / t_ref_k)^exponent
    """

    kind: str = "activated"
    gamma0_mhz: float = 145.0
    amplitude_mhz: float = 0.0
    activation_mev: float = 0.0
    exponent: float = 5.0
    t_ref_k: float = 26.0
    pins: tuple = ()

    K_PER_MEV = 11.604518

    def gamma_hom_mhz(self, t_k):
        t = np.asarray(t_k, dtype=float)
        if np.any(t <= 0):
            raise ValueError("temperature must be > 0 K")
        if self.kind == "activated":
            grow = self.amplitude_mhz * np.exp(-self.activation_mev * self.K_PER_MEV / t)
        elif self.kind == "power-law":
            grow = self.amplitude_mhz * (t / self.t_ref_k) ** self.exponent
        else:
            raise ValueError(f"unknown temperature model kind {self.kind!r}")
        return self.gamma0_mhz + grow

    @classmethod
    def solve_activated(cls, gamma0_mhz, pin_low, pin_high):
        """Fit (amplitude, activation) through two (T_k, Gamma_mhz) pins."""
        (t1, g1), (t2, g2) = pin_low, pin_high
        if not (0 < t1 < t2 and g1 > gamma0_mhz and g2 > g1):
            raise ValueError("pins must satisfy 0 < T1 < T2 and gamma0 < G1 < G2")
        ea_k = math.log((g2 - gamma0_mhz) / (g1 - gamma0_mhz)) / (1.0 / t1 - 1.0 / t2)
        amplitude = (g1 - gamma0_mhz) * math.exp(ea_k / t1)
        return cls(
            kind="activated",
            gamma0_mhz=gamma0_mhz,
            amplitude_mhz=amplitude,
            activation_mev=ea_k / cls.K_PER_MEV,
            pins=(tuple(pin_low), tuple(pin_high)),
        )

    @classmethod
    def solve_power_law(cls, gamma0_mhz, exponent, pin):
        """Fit the amplitude through one (T_k, Gamma_mhz) pin at t_ref = pin T."""
        t1, g1 = pin
        if not (t1 > 0 and g1 > gamma0_mhz):
            raise ValueError("pin must satisfy T > 0 and Gamma > gamma0")
        return cls(
            kind="power-law",
            gamma0_mhz=gamma0_mhz,
            amplitude_mhz=g1 - gamma0_mhz,
            exponent=exponent,
            t_ref_k=t1,
            pins=(tuple(pin),),
        )

    def describe(self) -> dict:
        out = {
            "kind": self.kind,
            "gamma0_mhz": self.gamma0_mhz,
            "amplitude_mhz": self.amplitude_mhz,
            "pins": [list(p) for p in self.pins],
        }
        if self.kind == "activated":
            out["activation_mev"] = self.activation_mev
        else:
            out["exponent"] = self.exponent
            out["t_ref_k"] = self.t_ref_k
        return out


@dataclass
class EnsembleCurve:
    """A reported sweep: abscissa plus named value columns and metadata."""

    abscissa: np.ndarray
    abscissa_unit: str
    columns: dict
    metadata: dict = field(default_factory=dict)

    def validate(self) -> None:
        n = len(self.abscissa)
        for name, vals in self.columns.items():
            if len(vals) != n:
                raise ValueError(f"column {name} length mismatch")
            if not np.all(np.isfinite(vals)):
                raise ValueError(f"column {name} contains non-finite values")

    @property
    def contrast(self):
        return self.columns.get("contrast")

    @property
    def pl(self):
        for key in ("pl_per_defect", "pl_off_per_defect"):
            if key in self.columns:
                return self.columns[key]
        return None


def detuning_quadrature(
    dist: InhomogeneousDist,
    laser_center_ghz: float,
    n: int = 401,
    cutoff_sigmas: float = 4.0,
    dense_scale_ghz: float | None = None,
):
    """Weighted grid of defect-class laser detunings (GHz).

    Places a sinh-warped grid over the ZPL offset coordinate, densest at
    the laser frequency (spacing ~ dense_scale/n) and coarse in the
    Gaussian wings, out to cutoff_sigmas on both sides of the distribution
    center.  Weights are the Gaussian density times the cell measure,
    normalized to sum to exactly 1.  Deterministic for fixed inputs.

    Returns (detunings_ghz, weights): detuning = laser - defect ZPL.
    """
    dist.validate()
    if n < 3:
        raise ValueError("need at least 3 quadrature points")
    if cutoff_sigmas < 3:
        raise ValueError("cutoff must be at least 3 sigma")
    sigma = dist.sigma_ghz
    if dense_scale_ghz is None:
        dense_scale_ghz = sigma / 100.0
    a = float(np.clip(dense_scale_ghz, 1e-6, sigma))
    x0 = laser_center_ghz - dist.center_ghz  # laser offset from dist center
    lo = -cutoff_sigmas * sigma - x0
    hi = cutoff_sigmas * sigma - x0
    u_lo = math.asinh(lo / a)
    u_hi = math.asinh(hi / a)
    du = (u_hi - u_lo) / n
    u = u_lo + (np.arange(n) + 0.5) * du
    offsets = x0 + a * np.sinh(u)  # defect ZPL offsets from dist center
    weights = np.exp(-(offsets**2) / (2.0 * sigma**2)) * np.cosh(u)
    weights /= weights.sum()
    detunings = x0 - offsets
    return detunings, weights


def modulated_laser_distribution(mod_span_ghz: float, n: int = 65):
    """Dwell-time distribution of a sinusoidally swept laser frequency.

    Returns (offsets_ghz, weights): the arcsine density over
    [-span/2, +span/2] integrated over n uniform cells, normalized.  The
    weights peak at the turning points; span 0 collapses to one point.
    """
    if mod_span_ghz < 0:
        raise ValueError("mod_span_ghz must be >= 0")
    if mod_span_ghz == 0.0:
        return np.array([0.0]), np.array([1.0])
    half = mod_span_ghz / 2.0
    edges = np.linspace(-half, half, n + 1)
    cdf = 0.5 + np.arcsin(np.clip(edges / half, -1.0, 1.0)) / math.pi
    weights = np.diff(cdf)
    weights /= weights.sum()
    centers = 0.5 * (edges[:-1] + edges[1:])
    return centers, weights


def sub_ensemble_fraction(gamma_hom: float, gamma_inh: float) -> float:
    """Fraction of defects within one homogeneous FWHM of the laser.

    Convention: the unit-area Gaussian of FWHM gamma_inh evaluated at its
    peak, times gamma_hom, i.e. 2 sqrt(ln2/pi) * gamma_hom / gamma_inh.
    Both linewidths must be given in the same unit.
    """
    if gamma_hom <= 0 or gamma_inh <= 0:
        raise ValueError("linewidths must be > 0")
    if gamma_hom >= gamma_inh:
        raise ValueError("gamma_hom must be smaller than gamma_inh")
    return GAUSS_PEAK_FACTOR * gamma_hom / gamma_inh


def voigt_fwhm(fwhm_lorentz: float, fwhm_gauss: float) -> float:
    """Olivero-Longbothum approximation of the Voigt FWHM (~0.02%)."""
    return 0.5346 * fwhm_lorentz + math.sqrt(0.2166 * fwhm_lorentz**2 + fwhm_gauss**2)


class EnsembleModel:
    """Ensemble ODMR evaluator built from per-defect physics.

    Carries the spin transition tables (per hyperfine branch), the rate
    parameters, the inhomogeneous distribution, and the RF drive scale, and
    evaluates ensemble PL and contrast by weighted summation over the
    detuning quadrature.  All reductions happen in fixed grid order, so
    outputs are bit-reproducible for identical inputs.
    """

    def __init__(
        self,
        rates: dd.RateParams,
        zeeman: sc.ZeemanZfsParams,
        hyperfine: sc.HyperfineParams | None,
        dist: InhomogeneousDist,
        rf_omega_per_s: float,
        rf_gamma2_per_s: float,
        drive_axis=(1.0, 0.0, 0.0),
        n_quadrature: int = 401,
        cutoff_sigmas: float = 4.0,
        mod_points: int = 65,
        weight_floor: float = 1e-9,
    ):
        rates.validate()
        dist.validate()
        self.rates = rates
        self.zeeman = zeeman
        self.hyperfine = hyperfine
        self.dist = dist
        self.rf_omega_per_s = rf_omega_per_s
        self.rf_gamma2_per_s = rf_gamma2_per_s
        self.drive_axis = tuple(drive_axis)
        self.n_quadrature = int(n_quadrature)
        self.cutoff_sigmas = float(cutoff_sigmas)
        self.mod_points = int(mod_points)
        self.weight_floor = float(weight_floor)

        levels = sc.eigenlevels(sc.build_hamiltonian(zeeman))
        self.main_table = sc.transition_table(levels, drive_axis, weight_floor)
        self.branches = [(1.0, sc.ground_channels(self.main_table))]
        self.line_table = self.main_table
        if hyperfine is not None and hyperfine.satellite_weight > 0.0:
            sw = hyperfine.satellite_weight
            self.branches = [(1.0 - sw, sc.ground_channels(self.main_table))]
            for m_i in (0.5, -0.5):
                lv = sc.eigenlevels(sc.build_hamiltonian(zeeman, hyperfine, m_i))
                tab = sc.transition_table(lv, drive_axis, weight_floor)
                self.branches.append((sw / 2.0, sc.ground_channels(tab)))
            self.line_table = sc.hyperfine_satellites(self.main_table, hyperfine)

        self._g0 = dd.base_generator(rates)
        self._p12, self._p32 = dd.optical_patterns()

    # -- geometry ----------------------------------------------------------

    def main_line_mhz(self, which: str = "low") -> float:
        """Frequency of the interdoublet Delta m = 1 lines.

        'low' is the -3/2 <-> -1/2 transition, 'high' the +1/2 <-> +3/2.
        """
        pair = {"low": {0, 1}, "high": {2, 3}}[which]
        for a, b, f_mhz, _, _ in sc.ground_channels(self.main_table):
            if {a, b} == pair:
                return f_mhz
        raise NumericalError(f"no {which} interdoublet line in the transition table")

    def quadrature(self, laser_offset_ghz: float = 0.0, gamma_hom_hz: float | None = None):
        gamma = self.rates.gamma_hom_hz if gamma_hom_hz is None else gamma_hom_hz
        dense = max(gamma / 1e9, 1e-3) / 2.0
        return detuning_quadrature(
            self.dist,
            self.dist.center_ghz + laser_offset_ghz,
            self.n_quadrature,
            self.cutoff_sigmas,
            dense_scale_ghz=dense,
        )

    # -- per-class optical rates -------------------------------------------

    def _class_rates(
        self,
        w0_per_s: float,
        broadband: bool,
        laser_offset_ghz: float,
        gamma_hom_hz: float | None,
        mod_span_ghz: float,
    ):
        """Quadrature weights plus per-class (w12, w32) excitation rates."""
        gamma = self.rates.gamma_hom_hz if gamma_hom_hz is None else gamma_hom_hz
        if broadband:
            det = np.array([0.0])
            wts = np.array([1.0])
            w12 = np.array([w0_per_s])
            return det, wts, w12, w12.copy()
        det_ghz, wts = self.quadrature(laser_offset_ghz, gamma)
        det_hz = det_ghz * 1e9
        mod_off, mod_wts = modulated_laser_distribution(mod_span_ghz, self.mod_points)
        grid = det_hz[:, None] + mod_off[None, :] * 1e9
        w12 = dd.optical_rate(grid, gamma, w0_per_s) @ mod_wts
        w32 = dd.optical_rate(grid + self.rates.delta_opt_hz, gamma, w0_per_s) @ mod_wts
        return det_ghz, wts, w12, w32

    def _class_generators(self, w12, w32):
        return (
            self._g0[None, :, :]
            + w12[:, None, None] * self._p12[None, :, :]
            + w32[:, None, None] * self._p32[None, :, :]
        )

    def _solve(self, gens, context: str):
        try:
            return dd.steady_state_batched(gens)
        except DegenerateGeneratorError as exc:
            raise DegenerateGeneratorError(f"{context}: {exc}") from exc

    # -- ensemble evaluations ------------------------------------------------

    def pl_off(
        self,
        w0_per_s: float,
        broadband: bool = False,
        laser_offset_ghz: float = 0.0,
        gamma_hom_hz: float | None = None,
        mod_span_ghz: float = 0.0,
    ) -> float:
        """Ensemble PL per defect with no RF drive."""
        _, wts, w12, w32 = self._class_rates(
            w0_per_s, broadband, laser_offset_ghz, gamma_hom_hz, mod_span_ghz
        )
        pops = self._solve(self._class_generators(w12, w32), "rf-off solve")
        return float(wts @ dd.pl_rate(pops, self.rates))

    def odmr_spectrum(
        self,
        rf_freqs_mhz,
        w0_per_s: float,
        broadband: bool = False,
        laser_offset_ghz: float = 0.0,
        gamma_hom_hz: float | None = None,
        mod_span_ghz: float = 0.0,
        chunk: int = 24,
    ) -> EnsembleCurve:
        """Ensemble contrast and PL versus RF frequency."""
        freqs = np.asarray(rf_freqs_mhz, dtype=float)
        det, wts, w12, w32 = self._class_rates(
            w0_per_s, broadband, laser_offset_ghz, gamma_hom_hz, mod_span_ghz
        )
        g_classes = self._class_generators(w12, w32)
        pops_off = self._solve(g_classes, "rf-off solve")
        pl_off = float(wts @ dd.pl_rate(pops_off, self.rates))
        if pl_off <= 0.0:
            raise NumericalError("ensemble PL with RF off is zero; contrast undefined")

        pl_on = np.empty_like(freqs)
        n_classes = len(det)
        for start in range(0, len(freqs), chunk):
            f_chunk = freqs[start : start + chunk]
            stack = np.empty((len(f_chunk), len(self.branches), n_classes, 9, 9))
            for fi, f in enumerate(f_chunk):
                for bi, (_, channels) in enumerate(self.branches):
                    rf = dd.RfDrive(
                        frequency_mhz=float(f),
                        omega_per_s=self.rf_omega_per_s,
                        gamma2_per_s=self.rf_gamma2_per_s,
                    )
                    stack[fi, bi] = g_classes + dd.rf_generator(rf, channels)[None, :, :]
            pops = self._solve(stack, "rf-on solve")
            pl_classes = dd.pl_rate(pops, self.rates)  # (F, B, K)
            branch_w = np.array([bw for bw, _ in self.branches])
            pl_on[start : start + chunk] = np.einsum(
                "b,k,fbk->f", branch_w, wts, pl_classes
            )
        contrast = (pl_on - pl_off) / pl_off
        curve = EnsembleCurve(
            abscissa=freqs,
            abscissa_unit="rf_mhz",
            columns={
                "contrast": contrast,
                "pl_on_per_defect": pl_on,
                "pl_off_per_defect": np.full_like(freqs, pl_off),
            },
            metadata={"quadrature": n_classes, "branches": len(self.branches)},
        )
        curve.validate()
        return curve

    def contrast_at(
        self,
        rf_freq_mhz: float,
        w0_per_s: float,
        broadband: bool = False,
        laser_offset_ghz: float = 0.0,
        gamma_hom_hz: float | None = None,
        mod_span_ghz: float = 0.0,
    ) -> float:
        """Ensemble contrast at a single RF frequency."""
        curve = self.odmr_spectrum(
            [rf_freq_mhz],
            w0_per_s,
            broadband=broadband,
            laser_offset_ghz=laser_offset_ghz,
            gamma_hom_hz=gamma_hom_hz,
            mod_span_ghz=mod_span_ghz,
        )
        return float(curve.columns["contrast"][0])

    def ple_scan(
        self,
        laser_offsets_ghz,
        w0_per_s: float,
        gamma_hom_hz: float | None = None,
    ) -> EnsembleCurve:
        """PL (no RF) versus laser offset from the distribution center."""
        offsets = np.asarray(laser_offsets_ghz, dtype=float)
        if np.ptp(offsets) < 3.0 * self.dist.fwhm_ghz:
            raise ValueError("PLE grid must span at least 3x the inhomogeneous FWHM")
        pl = np.empty_like(offsets)
        for i, off in enumerate(offsets):
            pl[i] = self.pl_off(w0_per_s, laser_offset_ghz=float(off), gamma_hom_hz=gamma_hom_hz)
        curve = EnsembleCurve(
            abscissa=offsets,
            abscissa_unit="laser_offset_ghz",
            columns={"pl_per_defect": pl},
            metadata={"quadrature": self.n_quadrature},
        )
        curve.validate()
        return curve
