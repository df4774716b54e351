"""Simulator and analysis toolkit for cw ODMR of spin-3/2 defect ensembles.

Submodules
----------
spin_core        ground-state spin Hamiltonian and RF transition table
defect_dynamics  per-defect 9-state optical pumping rate model
ensemble         inhomogeneous-ensemble spectra and sweep curves
sensing          lock-in synthesis, Welch spectra, magnetometry figures
scenario         configuration schema, defaults, and hashing
cli              command-line interface writing CSV/JSON plus figures
"""

__version__ = "0.1.0"
