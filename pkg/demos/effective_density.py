"""How state lifetimes smooth a structured spectral density.

The vibrational density of a dye is a comb of sharp modes.  A transition
between two lossy states samples it through a Lorentzian of width
gamma_i + gamma_f, so what the dynamics actually sees is a much smoother
effective density.  Here the surrogate structured density is broadened with
the polariton width (UP -> UP pair) and with polariton + emitter width
(UP -> dark state pair), and a coarse text plot is printed.

Run:  python demos/effective_density.py
"""

import numpy as np

from brls import effective_sd_curve, surrogate_structured_density

sd = surrogate_structured_density()
gamma_c, gamma_e = 0.1, 1e-4
gp = 0.5 * (gamma_c + gamma_e)

w = np.linspace(0.0, 0.4, 2000)
curves = {
    "J0": sd(w),
    "J1 (Gp+Gp)": effective_sd_curve(sd, w, 2 * gp),
    "J2 (Gp+ge)": effective_sd_curve(sd, w, gp + gamma_e),
}

for name, J in curves.items():
    tv = np.abs(np.diff(J)).sum()
    print(f"{name:>11}: peak {J.max():.4f} eV, total variation {tv:.4f} eV")

print("\n omega   " + "".join(f"{n:>13}" for n in curves))
for k in range(0, w.size, 100):
    print(f" {w[k]:.3f} " + "".join(f"{J[k]:13.5f}" for J in curves.values()))
