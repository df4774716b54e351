"""Physical constants used throughout the simulator.

All values are CODATA; every unit conversion in the package goes through
this table so there is a single place to audit.
"""

# Bohr magneton over Planck constant.  13.996245 GHz/T equals
# 13.996245 MHz/mT, which is the convenient unit for the spin Hamiltonian.
MU_B_OVER_H_GHZ_PER_T = 13.996245
MU_B_OVER_H_MHZ_PER_MT = MU_B_OVER_H_GHZ_PER_T  # numerically identical

HBAR_J_S = 1.054571817e-34
PLANCK_J_S = 6.62607015e-34
C_M_PER_S = 2.99792458e8

# Free-electron g factor used in the shot-noise sensitivity bound.
# g_e * (mu_B/h) = 28.03 GHz/T.
G_ELECTRON = 2.0028

# 1 microelectronvolt expressed as an ordinary frequency, E/h.
MHZ_PER_UEV = 241.799


def wavelength_nm_to_freq_ghz(lambda_nm: float) -> float:
    """Vacuum wavelength (nm) to frequency (GHz)."""
    return C_M_PER_S / (lambda_nm * 1e-9) / 1e9


def freq_ghz_to_wavelength_nm(nu_ghz: float) -> float:
    """Frequency (GHz) to vacuum wavelength (nm)."""
    return C_M_PER_S / (nu_ghz * 1e9) * 1e9


def dbm_to_mw(p_dbm: float) -> float:
    """RF power in dBm to milliwatts."""
    return 10.0 ** (p_dbm / 10.0)


# Conversion factor of the shot-noise bound: tesla per hertz of spin
# transition shift, 1 / (g_e * mu_B/h).  The slope alpha in the bound is a
# derivative with respect to ordinary frequency, so the matching constant
# is h/(g_e mu_B), not hbar/(g_e mu_B); the latter would undercount by 2*pi.
TESLA_PER_HZ_GE = 1.0 / (G_ELECTRON * MU_B_OVER_H_GHZ_PER_T * 1e9)
