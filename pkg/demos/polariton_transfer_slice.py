"""UP -> LP transfer for a single emitter in a lossy cavity, three ways.

A Lorentzian vibrational bath peaked at 0.2 eV couples to the emitter.  We
start in the upper polariton and follow the lower-polariton population with
the loss-broadened tensor, the standard Bloch-Redfield tensor and the
discretized-bath reference, for a handful of couplings.  Plain BR only moves
population when the Rabi splitting 2 g hits the bath peak; with the losses
folded into the transition spectra the transfer is spread over a wide range
of couplings, as in the reference.

Run:  python demos/polariton_transfer_slice.py
"""

import numpy as np

from brls import (HBAR_EV_FS, SpectralDensity, assemble_generator, br_tensor, brls_tensor,
                  build_nh, decompose, default_grid, discretize, eigen_couplings,
                  eigenstate_density, evolve, exact_evolve, tavis_cummings)

bath = SpectralDensity.lorentzian(0.03, 0.2, 0.005)
oracle_bath = discretize(bath)
grid = default_grid(200.0, 400)
late = grid * HBAR_EV_FS > 13.0

print(" g_ec   max P_LP: exact    BRLS      BR   | sup dev BRLS   BR")
for g in (0.06, 0.08, 0.10, 0.12, 0.14):
    model = tavis_cummings(1, 2.0, 2.0, g, 0.1, 1e-4, bath)
    eig = decompose(build_nh(model))
    rho0 = eigenstate_density(eig, 2)
    couplings = eigen_couplings(eig, model)
    p_ex = exact_evolve(model, oracle_bath, rho0, grid).populations[:, 1]
    p_a = evolve(assemble_generator(eig, brls_tensor(eig, couplings), model.jumps),
                 rho0, grid).populations[:, 1]
    p_b = evolve(assemble_generator(eig, br_tensor(eig, couplings), model.jumps),
                 rho0, grid).populations[:, 1]
    da = np.abs(p_a - p_ex)[late].max()
    db = np.abs(p_b - p_ex)[late].max()
    print(f" {g:.2f}   {p_ex.max():12.4f} {p_a.max():8.4f} {p_b.max():8.4f}"
          f" | {da:10.4f} {db:7.4f}")
