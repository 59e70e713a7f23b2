"""Cavity dephasing instead of cavity decay.

With the jump a^dag a the excitation stays in the system, so the question is
only how the loss-broadened tensor handles a jump that reshuffles rather
than removes population.  The script prints the cavity occupation, emitter
excitation and the coherence <sigma^+ a> from the tensor and from the
discretized-bath reference (one phonon at most).

The populations agree closely.  The coherence agrees early on, but later the
reference lets it die out while the tensor keeps a steady value.  Dephasing
keeps re-exciting the upper polariton, and every further UP -> LP hop needs
another phonon, which the one-phonon reference cannot emit.  Raising the cap on
a small bath moves the reference towards the tensor.

Run:  python demos/dephasing.py   (about a minute)
"""

import numpy as np

from brls import (HBAR_EV_FS, SpectralDensity, assemble_generator, basis_density, brls_tensor,
                  build_nh, decompose, default_grid, discretize, eigen_couplings, evolve,
                  exact_evolve, observables, tavis_cummings)

bath = SpectralDensity.lorentzian(0.03, 0.2, 0.005)
model = tavis_cummings(1, 2.0, 2.0, 0.1, 0.1, 0.0, bath, jump="dephasing")
eig = decompose(build_nh(model))
space = model.space
rho0 = basis_density(model.dim, space.index[(0, 1)])
ops = [space.number(0), space.number(1), space.raise_(1) @ space.lower(0)]
grid = default_grid()

ex = observables(exact_evolve(model, discretize(bath), rho0, grid), ops)
br = observables(evolve(assemble_generator(eig, brls_tensor(eig, eigen_couplings(eig, model)),
                                           model.jumps), rho0, grid), ops)

print("  t (fs)   <a+a> ex/BRLS     <s+s-> ex/BRLS    Re<s+a> ex/BRLS")
for k in range(0, grid.size, 40):
    row = "  ".join(f"{ex[i, k].real:7.4f} {br[i, k].real:7.4f}" for i in range(3))
    print(f"{grid[k] * HBAR_EV_FS:7.1f}   {row}")
print("max |difference|:", np.round(np.abs(ex - br).max(axis=1), 4))
