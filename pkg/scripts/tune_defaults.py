#!/usr/bin/env python3
"""Tuning procedure for the shipped default scenarios.

The rate model has four free knobs the experiment does not pin directly:
the two intersystem-crossing rates and the metastable branching (which
together set the broadband contrast), and the RF coupling k_rf (which
sets where the ODMR response saturates and therefore the observed
linewidth and the resonant contrast at the default 2 uW / 3 dBm point).

This script evaluates every tuned target for a candidate parameter set:

  1. resonant peak contrast at the default point      -> [0.40, 0.60]
  2. broadband contrast at 30 mW                      -> [0.002, 0.010]
  3. resonant/broadband ratio                         -> >= 50
  4. satellite peaks visible but << main peaks
  5. broadband contrast flat (+-20%) over 0.3..30 mW
  6. modulation sweep strictly decreasing, C(5G)/C(0) <= 0.3
  7. temperature sweep: bands at 4 K / 60 K, monotone,
     steepest relative drop inside 20..30 K
  8. resonant power sweep peaks at low power, then declines

Run it after editing src/vsim_odmr/defaults/*.default; it prints one
line per target.  The shipped defaults are the last set that passed all
targets here.
"""

import argparse
import sys
import time

import numpy as np

from vsim_odmr import scenario as scn
from vsim_odmr.runner import (
    modulation_sweep,
    odmr_spectrum_curve,
    power_sweep,
    temperature_sweep,
)


def check(name, ok, detail):
    print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    return ok


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--config", default="resonant.default")
    ap.add_argument("--offconfig", default="offresonant.default")
    args = ap.parse_args()

    s = scn.load_scenario(args.config)
    so = scn.load_scenario(args.offconfig)
    ok = True

    model = s.model()
    f_low = model.main_line_mhz("low")

    t0 = time.time()
    curve = odmr_spectrum_curve(s)
    dt = time.time() - t0
    c = curve.columns["contrast"]
    freqs = curve.abscissa
    c_res = float(c[np.abs(freqs - f_low).argmin()])
    ok &= check("resonant contrast", 0.40 <= c_res <= 0.60, f"{c_res:.3f} (target 0.40..0.60)")
    ok &= check("spectrum runtime", dt < 1.0, f"{dt:.2f} s for {len(freqs)} points")

    c_bb = so.model().contrast_at(f_low, so.w0_per_s(), broadband=True)
    ok &= check("broadband contrast", 0.002 <= c_bb <= 0.010, f"{c_bb:.4f} (target 0.002..0.010)")
    ok &= check("contrast ratio", c_res / c_bb >= 50, f"{c_res / c_bb:.0f} (target >= 50)")

    # satellite visibility: local max near 53.8 MHz, well below the main peak
    i_sat = np.abs(freqs - (f_low + s.spin.a_parallel_mhz / 2)).argmin()
    sat_window = c[i_sat - 4 : i_sat + 5]
    i_mid = np.abs(freqs - (f_low + 2 * s.spin.a_parallel_mhz)).argmin()
    shoulder = c[i_mid]
    bump = sat_window.max() - shoulder
    ok &= check(
        "satellites",
        0.005 * c_res < bump and sat_window.max() < 0.5 * c_res,
        f"bump {bump:.4f} above shoulder, peak {sat_window.max():.3f} vs main {c_res:.3f}",
    )

    pw, flat_c, _ = power_sweep(so, mode="broadband")
    sel = (pw >= 0.3e-3) & (pw <= 30e-3)
    spread = flat_c[sel].max() / flat_c[sel].min() - 1.0
    ok &= check("broadband flat", spread <= 0.4, f"max/min-1 = {spread:.2f} over 0.3..30 mW")

    spans, cm = modulation_sweep(s)
    mono = np.all(np.diff(cm) < 0)
    ratio = cm[spans.tolist().index(5.0)] / cm[0]
    ok &= check("modulation sweep", mono and ratio <= 0.3, f"monotone={mono}, C(5)/C(0)={ratio:.2f}")

    temps, ct, gam = temperature_sweep(s)
    mono_t = np.all(np.diff(ct) < 0)
    drops = (ct[:-1] - ct[1:]) / ct[:-1]
    k = int(np.argmax(drops))
    in_band = 20.0 <= temps[k] and temps[k + 1] <= 30.0
    ok &= check(
        "temperature sweep",
        mono_t and in_band and 0.40 <= ct[0] <= 0.60 and ct[-1] <= 0.01,
        f"C(4K)={ct[0]:.3f}, C(60K)={ct[-1]:.4f}, steepest drop {temps[k]:.0f}->{temps[k+1]:.0f} K",
    )

    pw_r, c_r, pl_r = power_sweep(s, mode="resonant")
    k_peak = int(np.argmax(c_r))
    ok &= check(
        "resonant power sweep",
        pw_r[k_peak] <= 1e-4 and c_r[-1] < 0.5 * c_r[k_peak],
        f"peak C={c_r[k_peak]:.3f} at {pw_r[k_peak]*1e6:.0f} uW, C(end)={c_r[-1]:.3f}",
    )

    print("all targets met" if ok else "SOME TARGETS FAILED")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
