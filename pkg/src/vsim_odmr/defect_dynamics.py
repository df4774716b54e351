"""Per-defect rate-equation model of spin-selective optical pumping.

Nine classical populations: four ground sublevels, four excited sublevels,
one metastable pool:

    index  0       1       2       3       4       5       6       7    8
    state  g(-3/2) g(-1/2) g(+1/2) g(+3/2) e(-3/2) e(-1/2) e(+1/2) e(+3/2) m

Optical excitation is spin-conserving and connects g <-> e within each
sublevel; the +-1/2 and +-3/2 optical lines are split by delta_opt, so a
narrow laser pumps one doublet and optically polarizes the other.  The
intersystem crossing routes excited population into the metastable pool
with spin-dependent rates, and the pool branches back into the ground
doublets.  All rates in 1/s; the generator is column-stochastic
(dp/dt = G p, columns sum to zero).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGeneratorError, NumericalError

N_STATES = 9
GROUND = slice(0, 4)
EXCITED = slice(4, 8)
META = 8

# spin-conserving optical pairs (ground index, excited index)
_PAIRS_12 = ((1, 5), (2, 6))
_PAIRS_32 = ((0, 4), (3, 7))


@dataclass
class RateParams:
    """Relaxation and pumping rates of the 9-state scheme.

    branch_12 is the metastable branching fraction into g(+-1/2); the
    remainder goes to g(+-3/2).  gamma_hom_hz is the homogeneous optical
    FWHM; delta_opt_hz the splitting between the +-1/2 and +-3/2
    spin-conserving optical lines.  detection_fraction lumps the phonon
    sideband and collection efficiency applied to emitted photons.
    """

    gamma_rad_per_s: float = 1.67e8
    k_isc_12_per_s: float = 1.1e8
    k_isc_32_per_s: float = 1.0e8
    branch_12: float = 0.55
    gamma_m_per_s: float = 5.0e6
    t1_s: float = 1.0e-3
    gamma_hom_hz: float = 145.0e6
    delta_opt_hz: float = 1.0e9
    detection_fraction: float = 1.0

    def validate(self) -> None:
        rates = (
            self.gamma_rad_per_s,
            self.k_isc_12_per_s,
            self.k_isc_32_per_s,
            self.gamma_m_per_s,
        )
        if any(not np.isfinite(r) or r < 0 for r in rates):
            raise ValueError("decay rates must be finite and >= 0")
        if not 0.0 <= self.branch_12 <= 1.0:
            raise ValueError("branch_12 must lie in [0, 1]")
        if self.t1_s <= 0:
            raise ValueError("t1_s must be > 0 (may be large)")
        if self.gamma_hom_hz <= 0:
            raise ValueError("gamma_hom_hz must be > 0")
        if self.delta_opt_hz <= 0:
            raise ValueError("delta_opt_hz must be > 0")
        if not 0.0 < self.detection_fraction <= 1.0:
            raise ValueError("detection_fraction must lie in (0, 1]")


@dataclass
class LaserDrive:
    """Optical drive of one defect class.

    detuning_hz is laser frequency minus the defect's +-1/2 spin-conserving
    transition frequency.  peak_rate_per_s (w0) is the on-resonance
    excitation rate at the given laser power.  broadband = True models
    off-resonant excitation: both doublets pumped at w0 regardless of
    detuning.
    """

    detuning_hz: float = 0.0
    peak_rate_per_s: float = 1.0e5
    broadband: bool = False

    def validate(self) -> None:
        if self.peak_rate_per_s < 0 or not np.isfinite(self.peak_rate_per_s):
            raise ValueError("peak_rate_per_s must be finite and >= 0")


@dataclass
class RfDrive:
    """Incoherent RF drive: Rabi-equivalent angular rate and dephasing."""

    frequency_mhz: float = 49.0
    omega_per_s: float = 1.0e6
    gamma2_per_s: float = 6.3e6

    def validate(self) -> None:
        if self.omega_per_s < 0:
            raise ValueError("omega_per_s must be >= 0")
        if self.gamma2_per_s <= 0:
            raise ValueError("gamma2_per_s must be > 0")


def optical_rate(detuning_hz, gamma_hom_hz, w0_per_s):
    """Lorentzian excitation rate, FWHM convention.

    w0 (gamma/2)^2 / (detuning^2 + (gamma/2)^2).  Accepts arrays.
    """
    if np.any(np.asarray(gamma_hom_hz) <= 0):
        raise ValueError("gamma_hom_hz must be > 0")
    half = gamma_hom_hz / 2.0
    return w0_per_s * half**2 / (np.asarray(detuning_hz) ** 2 + half**2)


def rf_rate_array(rf: RfDrive, f_lines_mhz, dipole_weights):
    """Incoherent transition rates for lines driven at rf.frequency_mhz.

    Power-broadened Lorentzian in the RF detuning:

        rate = w om^2 (g2/2) / ((2 pi df)^2 + g2^2 (1 + s)/4),
        s = w om^2 / g2^2

    with w the dipole weight, om the Rabi-equivalent rate, g2 = 1/T2*.
    """
    rf.validate()
    w = np.asarray(dipole_weights, dtype=float)
    df = 2.0 * np.pi * (rf.frequency_mhz - np.asarray(f_lines_mhz, dtype=float)) * 1e6
    g2 = rf.gamma2_per_s
    s = w * rf.omega_per_s**2 / g2**2
    return w * rf.omega_per_s**2 * (g2 / 2.0) / (df**2 + g2**2 * (1.0 + s) / 4.0)


def rf_rate(rf: RfDrive, line) -> float:
    """Rate for a single TransitionLine-like object."""
    return float(rf_rate_array(rf, line.frequency_mhz, line.dipole_weight))


def exchange_pattern(i: int, j: int) -> np.ndarray:
    """Unit-rate symmetric exchange between states i and j (column sums 0)."""
    x = np.zeros((N_STATES, N_STATES))
    x[j, i] += 1.0
    x[i, i] -= 1.0
    x[i, j] += 1.0
    x[j, j] -= 1.0
    return x


_P12 = sum(exchange_pattern(g, e) for g, e in _PAIRS_12)
_P32 = sum(exchange_pattern(g, e) for g, e in _PAIRS_32)


def optical_patterns():
    """Unit-rate generator patterns of the two optical doublet drives."""
    return _P12.copy(), _P32.copy()


def base_generator(rates: RateParams) -> np.ndarray:
    """Generator of all laser- and RF-independent processes.

    Radiative decay e->g (spin-conserving), ISC e->m, metastable branching
    m->g, and ground-manifold relaxation.  T1 mixing uses a pairwise rate
    1/(4 T1), which leaves the uniform ground distribution stationary and
    relaxes any population difference at exactly 1/T1.
    """
    rates.validate()
    g = np.zeros((N_STATES, N_STATES))

    def add(src, dst, rate):
        g[dst, src] += rate
        g[src, src] -= rate

    for gi, ei in (*_PAIRS_12, *_PAIRS_32):
        add(ei, gi, rates.gamma_rad_per_s)
    for _, ei in _PAIRS_12:
        add(ei, META, rates.k_isc_12_per_s)
    for _, ei in _PAIRS_32:
        add(ei, META, rates.k_isc_32_per_s)
    for gi, _ in _PAIRS_12:
        add(META, gi, rates.gamma_m_per_s * rates.branch_12 / 2.0)
    for gi, _ in _PAIRS_32:
        add(META, gi, rates.gamma_m_per_s * (1.0 - rates.branch_12) / 2.0)
    mix = 0.25 / rates.t1_s
    for i in range(4):
        for j in range(4):
            if i != j:
                add(i, j, mix)
    return g


def optical_rates_pair(rates: RateParams, laser: LaserDrive):
    """Excitation rates (w12, w32) of the two spin-conserving lines.

    The +-3/2 line sits delta_opt below the +-1/2 line, so its detuning is
    laser detuning + delta_opt.  Broadband drive returns (w0, w0).
    """
    laser.validate()
    if laser.broadband:
        return laser.peak_rate_per_s, laser.peak_rate_per_s
    w12 = optical_rate(laser.detuning_hz, rates.gamma_hom_hz, laser.peak_rate_per_s)
    w32 = optical_rate(
        laser.detuning_hz + rates.delta_opt_hz, rates.gamma_hom_hz, laser.peak_rate_per_s
    )
    return float(w12), float(w32)


def rf_generator(rf: RfDrive, channels) -> np.ndarray:
    """Ground-manifold RF exchange generator for the given line channels.

    channels: iterables (idx_a, idx_b, frequency_mhz, dipole_weight, ...)
    as produced by spin_core.ground_channels.
    """
    g = np.zeros((N_STATES, N_STATES))
    if not channels:
        return g
    freqs = [c[2] for c in channels]
    weights = [c[3] for c in channels]
    rates = rf_rate_array(rf, freqs, weights)
    for (a, b, _, _, *_), r in zip(channels, rates):
        if a == b:
            continue
        g += r * exchange_pattern(a, b)
    return g


def build_generator(
    rates: RateParams,
    laser: LaserDrive,
    rf: RfDrive | None = None,
    channels=None,
) -> np.ndarray:
    """Full 9x9 population-flow generator (columns sum to zero)."""
    w12, w32 = optical_rates_pair(rates, laser)
    g = base_generator(rates) + w12 * _P12 + w32 * _P32
    if rf is not None:
        if channels is None:
            raise ValueError("RF drive requires ground-transition channels")
        g += rf_generator(rf, channels)
    return g


def steady_state(gen: np.ndarray, replace_row: int = META) -> np.ndarray:
    """Unique stationary distribution of a column-stochastic generator.

    Solves gen p = 0 with one balance row replaced by the normalization
    sum(p) = 1.  A reducible chain (no unique stationary state) is
    reported, never silently solved.
    """
    p = steady_state_batched(gen[np.newaxis], replace_row=replace_row)
    return p[0]


def steady_state_batched(gens: np.ndarray, replace_row: int = META) -> np.ndarray:
    """Stationary distributions for a stack of generators (..., 9, 9)."""
    gens = np.asarray(gens, dtype=float)
    if gens.shape[-2:] != (N_STATES, N_STATES):
        raise ValueError("expected (..., 9, 9) generator stack")
    colsum = np.abs(gens.sum(axis=-2)).max()
    scale = max(np.abs(gens).max(), 1.0)
    if colsum > 1e-9 * scale:
        raise NumericalError("generator columns do not sum to zero")
    a = gens.copy()
    a[..., replace_row, :] = 1.0
    b = np.zeros(gens.shape[:-1] + (1,))
    b[..., replace_row, 0] = 1.0
    try:
        p = np.linalg.solve(a, b)[..., 0]
    except np.linalg.LinAlgError as exc:
        raise DegenerateGeneratorError(
            f"singular generator (reducible chain): {_locate_singular(a)}"
        ) from exc
    residual = np.abs(np.einsum("...ij,...j->...i", gens, p)).max(axis=-1)
    bad = ~np.isfinite(residual) | (residual > 1e-6 * scale) | (p.min(axis=-1) < -1e-9)
    if np.any(bad):
        idx = np.argwhere(bad)[0]
        raise DegenerateGeneratorError(
            f"no unique stationary distribution at batch index {tuple(idx)}; "
            "the chain is reducible or ill-conditioned"
        )
    return np.clip(p, 0.0, None)


def _locate_singular(a: np.ndarray) -> str:
    flat = a.reshape(-1, N_STATES, N_STATES)
    for k in range(flat.shape[0]):
        if abs(np.linalg.det(flat[k])) < 1e-300:
            return f"batch index {np.unravel_index(k, a.shape[:-2])}"
    return "batch index unknown"


def pl_rate(populations: np.ndarray, rates: RateParams):
    """Detected photon rate per defect: gamma_rad * (excited population)
    * detection_fraction.  Works on stacked population vectors."""
    p = np.asarray(populations)
    if np.any(p < -1e-9) or np.any(np.abs(p.sum(axis=-1) - 1.0) > 1e-6):
        raise ValueError("populations must be a probability vector")
    excited = p[..., EXCITED].sum(axis=-1)
    return rates.gamma_rad_per_s * excited * rates.detection_fraction


def defect_contrast(
    rates: RateParams,
    laser: LaserDrive,
    rf: RfDrive,
    channels,
) -> float:
    """Single-defect ODMR contrast C = (PL_on - PL_off) / PL_off."""
    gen_off = build_generator(rates, laser)
    pl_off = float(pl_rate(steady_state(gen_off), rates))
    if pl_off <= 0.0:
        raise NumericalError(
            "PL with RF off is zero (fully pumped dark defect); contrast undefined"
        )
    gen_on = build_generator(rates, laser, rf, channels)
    pl_on = float(pl_rate(steady_state(gen_on), rates))
    return (pl_on - pl_off) / pl_off
