"""Ground-state spin Hamiltonian of the spin-3/2 defect.

Builds the S = 3/2 Zeeman + zero-field-splitting Hamiltonian, diagonalizes
it, and derives the RF transition table (frequencies and magnetic-dipole
weights) including the weak hyperfine satellite lines contributed by
defects coupled to a nearby spin-1/2 nucleus.

Units: energies and frequencies in MHz, magnetic field in mT.  The basis
ordering is m_s = +3/2, +1/2, -1/2, -3/2.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import linear_sum_assignment

from .constants import MU_B_OVER_H_MHZ_PER_MT
from .errors import NumericalError

M_S_BASIS = (1.5, 0.5, -0.5, -1.5)

# Ground-manifold population index used by the rate model, keyed by m_s.
GROUND_INDEX = {-1.5: 0, -0.5: 1, 0.5: 2, 1.5: 3}


@dataclass(frozen=True)
class SpinOperators:
    """Spin-3/2 matrices in the sz eigenbasis (m = +3/2 ... -3/2)."""

    sx: np.ndarray
    sy: np.ndarray
    sz: np.ndarray


def spin_operators_3_2() -> SpinOperators:
    """Canonical spin-3/2 operators (hbar = 1).

    Off-diagonal elements follow the ladder rule
    <m'|S+-|m> = sqrt(s(s+1) - m m'), giving sqrt(3)/2, 1, sqrt(3)/2 on
    the sx sub/superdiagonals.
    """
    s = 1.5
    m = np.array(M_S_BASIS)
    # S+ couples m -> m+1; with descending basis order that is row i, col i+1.
    ladder = np.sqrt(s * (s + 1) - m[1:] * m[:-1])
    sp = np.zeros((4, 4), dtype=complex)
    for i, amp in enumerate(ladder):
        sp[i, i + 1] = amp
    sm = sp.conj().T
    sx = 0.5 * (sp + sm)
    sy = -0.5j * (sp - sm)
    sz = np.diag(m).astype(complex)
    return SpinOperators(sx=sx, sy=sy, sz=sz)


@dataclass
class ZeemanZfsParams:
    """Electronic Zeeman + zero-field-splitting parameters.

    d_half_split_mhz is D in H = gamma B.S + D Sz^2; the zero-field doublet
    splitting is 2D.  b_field_mt is given in the crystal frame with
    z along the c-axis.
    """

    g: float = 2.0
    d_half_split_mhz: float = 35.0
    b_field_mt: tuple = (0.0, 0.0, 0.75)

    def validate(self) -> None:
        if not np.all(np.isfinite(self.b_field_mt)) or len(self.b_field_mt) != 3:
            raise ValueError("b_field_mt must be a finite 3-vector")
        if not (np.isfinite(self.g) and self.g > 0):
            raise ValueError("g must be finite and > 0")
        if not (np.isfinite(self.d_half_split_mhz) and self.d_half_split_mhz > 0):
            raise ValueError("d_half_split_mhz must be finite and > 0")


@dataclass
class HyperfineParams:
    """Coupling to one spin-1/2 nucleus carried by a fraction of defects."""

    a_parallel_mhz: float = 9.5
    a_perp_mhz: float = 0.0
    satellite_weight: float = 0.10

    def validate(self) -> None:
        if not 0.0 <= self.satellite_weight <= 1.0:
            raise ValueError("satellite_weight must lie in [0, 1]")
        if not np.isfinite(self.a_parallel_mhz) or not np.isfinite(self.a_perp_mhz):
            raise ValueError("hyperfine couplings must be finite")


def build_hamiltonian(
    p: ZeemanZfsParams,
    hf: HyperfineParams | None = None,
    m_i: float = 0.5,
) -> np.ndarray:
    """4x4 Hermitian spin Hamiltonian in MHz.

    H = g (mu_B/h) B.S + D Sz^2, plus, when hf is given, the hyperfine
    field of a nucleus frozen in projection m_i: a_parallel m_i Sz
    (secular part) and a_perp m_i Sx (mean-field transverse part, zero in
    the secular approximation a_perp = 0).
    """
    p.validate()
    if hf is not None:
        hf.validate()
        if m_i not in (0.5, -0.5):
            raise ValueError("m_i must be +1/2 or -1/2")
    ops = spin_operators_3_2()
    gamma = p.g * MU_B_OVER_H_MHZ_PER_MT  # MHz per mT
    bx, by, bz = (float(v) for v in p.b_field_mt)
    h = gamma * (bx * ops.sx + by * ops.sy + bz * ops.sz)
    h += p.d_half_split_mhz * (ops.sz @ ops.sz)
    if hf is not None:
        h += hf.a_parallel_mhz * m_i * ops.sz
        if hf.a_perp_mhz != 0.0:
            h += hf.a_perp_mhz * m_i * ops.sx
    return h


@dataclass
class SpinLevels:
    """Eigenlevels of the ground-state Hamiltonian.

    energies_mhz ascend; states holds the eigenvectors as columns;
    labels[i] is the dominant m_s of level i.
    """

    energies_mhz: np.ndarray
    states: np.ndarray
    labels: tuple


def eigenlevels(h: np.ndarray) -> SpinLevels:
    """Diagonalize a Hermitian 4x4 Hamiltonian and label the levels.

    Labels are assigned by maximal overlap with the sz eigenstates, with a
    one-to-one assignment so all four m_s labels stay distinct even for
    tilted fields.
    """
    h = np.asarray(h, dtype=complex)
    if h.shape != (4, 4):
        raise ValueError("expected a 4x4 matrix")
    scale = max(np.linalg.norm(h), 1.0)
    if np.linalg.norm(h - h.conj().T) > 1e-9 * scale:
        raise NumericalError("matrix is not Hermitian within 1e-9 relative")
    energies, states = np.linalg.eigh(h)
    # rows: basis m_s; columns: levels. Overlap of level j with basis i.
    overlap = np.abs(states) ** 2
    basis_idx, level_idx = linear_sum_assignment(-overlap)
    labels = [None] * 4
    for b, lev in zip(basis_idx, level_idx):
        labels[lev] = M_S_BASIS[b]
    return SpinLevels(energies_mhz=energies, states=states, labels=tuple(labels))


@dataclass(frozen=True)
class TransitionLine:
    """One RF line: level pair, frequency, and magnetic-dipole weight."""

    level_i: int
    level_j: int
    frequency_mhz: float
    dipole_weight: float
    satellite: bool = False


@dataclass
class TransitionTable:
    """RF transition lines plus the m_s labels of the underlying levels."""

    lines: list
    labels: tuple = field(default_factory=tuple)

    def total_weight(self) -> float:
        return float(sum(line.dipole_weight for line in self.lines))


def transition_table(
    levels: SpinLevels,
    drive_axis=(1.0, 0.0, 0.0),
    weight_floor: float = 1e-9,
) -> TransitionTable:
    """Magnetic-dipole transition table for an RF field along drive_axis.

    dipole_weight = |<i| S.n |j>|^2 for every level pair; lines weaker than
    weight_floor are omitted.
    """
    n = np.asarray(drive_axis, dtype=float)
    norm = np.linalg.norm(n)
    if norm == 0.0:
        raise ValueError("drive_axis must be a nonzero vector")
    n = n / norm
    ops = spin_operators_3_2()
    s_n = n[0] * ops.sx + n[1] * ops.sy + n[2] * ops.sz
    lines = []
    for i in range(4):
        for j in range(i + 1, 4):
            amp = levels.states[:, i].conj() @ s_n @ levels.states[:, j]
            weight = float(np.abs(amp) ** 2)
            freq = float(levels.energies_mhz[j] - levels.energies_mhz[i])
            if weight > weight_floor and freq > 0.0:
                lines.append(TransitionLine(i, j, freq, weight))
    return TransitionTable(lines=lines, labels=levels.labels)


def hyperfine_satellites(table: TransitionTable, hf: HyperfineParams) -> TransitionTable:
    """Split each line into a main line plus two satellites.

    A fraction satellite_weight of defects carries one coupled nucleus;
    in the secular approximation its two m_i = +-1/2 projections shift a
    line by +-a_parallel/2.  Total line weight is conserved exactly.
    """
    hf.validate()
    sw = hf.satellite_weight
    if sw == 0.0:
        return TransitionTable(lines=list(table.lines), labels=table.labels)
    shift = hf.a_parallel_mhz / 2.0
    lines = []
    for line in table.lines:
        lines.append(replace(line, dipole_weight=line.dipole_weight * (1.0 - sw)))
        for sgn in (-1.0, +1.0):
            lines.append(
                replace(
                    line,
                    frequency_mhz=line.frequency_mhz + sgn * shift,
                    dipole_weight=line.dipole_weight * sw / 2.0,
                    satellite=True,
                )
            )
    return TransitionTable(lines=lines, labels=table.labels)


def ground_channels(table: TransitionTable):
    """Map lines onto ground-manifold population indices.

    Returns (idx_a, idx_b, frequency_mhz, dipole_weight, satellite) tuples
    with indices following the rate-model convention
    g(-3/2), g(-1/2), g(+1/2), g(+3/2) -> 0..3.
    """
    channels = []
    for line in table.lines:
        a = GROUND_INDEX[table.labels[line.level_i]]
        b = GROUND_INDEX[table.labels[line.level_j]]
        channels.append((a, b, line.frequency_mhz, line.dipole_weight, line.satellite))
    return channels


def zeeman_ladder_frequencies_mhz(p: ZeemanZfsParams) -> tuple:
    """Closed-form |Delta m_s| = 1 ladder frequencies for B along z.

    Returns (f(-3/2 <-> -1/2), f(-1/2 <-> +1/2), f(+1/2 <-> +3/2)) =
    (|gamma Bz - 2D|, gamma Bz, gamma Bz + 2D).
    """
    gamma_bz = p.g * MU_B_OVER_H_MHZ_PER_MT * p.b_field_mt[2]
    two_d = 2.0 * p.d_half_split_mhz
    return (abs(gamma_bz - two_d), abs(gamma_bz), gamma_bz + two_d)
