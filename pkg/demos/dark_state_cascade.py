"""Thirty emitters in a cavity: the upper polariton empties into the dark states.

With N = 30 there are 28 dark states sitting between the polaritons.  The
loss-broadened rates send most of the UP population into this manifold,
which then leaks slowly into the LP.  Bloch-Redfield with the raw structured
density misses much of the UP -> DS transfer; substituting the effective
density recovers the loss-broadened result.

Run:  python demos/dark_state_cascade.py   (about two minutes)
"""

import numpy as np

from brls import (FCache, HBAR_EV_FS, assemble_generator, br_tensor, brls_tensor, build_nh,
                  decompose, default_grid, effective_density_table, eigen_couplings,
                  eigenstate_density, evolve, secular_rate, surrogate_structured_density,
                  tavis_cummings)

sd = surrogate_structured_density()
model = tavis_cummings(30, 2.0, 2.0, 0.2, 0.1, 1e-4, sd)
eig = decompose(build_nh(model))
d = eig.dim
up, lp, ds = d - 1, 1, np.arange(2, d - 1)
couplings = eigen_couplings(eig, model)

k_ds = sum(secular_rate(eig, couplings, up, f) for f in ds)
k_lp = secular_rate(eig, couplings, up, lp)
print(f"K(UP->DS) = {k_ds:.4g} eV, K(UP->LP) = {k_lp:.4g} eV")

grid = default_grid(1000.0, 1000)
rho0 = eigenstate_density(eig, up)
j1 = effective_density_table(sd, eig.widths[up] + eig.widths[ds].mean(),
                             np.linspace(0.0, 1.0, 1001))
runs = {
    "BRLS": brls_tensor(eig, couplings, cache=FCache()),
    "BR + J1eff": br_tensor(eig, eigen_couplings(eig, model, sd=j1)),
    "BR": br_tensor(eig, couplings),
}
print("\n                  P_UP    P_DS    P_LP")
for name, tensor in runs.items():
    P = evolve(assemble_generator(eig, tensor, model.jumps), rho0, grid).populations
    for t_fs in (20, 50, 200, 1000):
        k = np.searchsorted(grid * HBAR_EV_FS, t_fs - 1e-9)
        print(f"{name:>10} {t_fs:5d} fs {P[k, up]:.4f}  {P[k, ds].sum():.4f}  {P[k, lp]:.4f}")
