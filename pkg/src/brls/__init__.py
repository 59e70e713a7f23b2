"""Loss-broadened Bloch-Redfield dynamics for lossy open quantum systems.

Modules
-------
bath       spectral densities, correlation functions, F integrals, J_eff
operators  Hilbert spaces, system models, the NH Tavis-Cummings builder
nheig      biorthogonal eigendecomposition of NH Hamiltonians
redfield   BR LS / BR tensors, generators and secular rates
dynamics   propagation, basis transforms and observables
oracle     discretized-bath reference dynamics
nonmarkov  trace-distance non-Markovianity
cli        command-line front end (``brls``)
"""

__version__ = "0.1.0"

from .bath import (QuadratureError, SpectralDensity, TransitionSpectrum, correlation,
                   effective_density_table, effective_sd, effective_sd_curve, evaluate_sd,
                   half_fourier_f, surrogate_structured_density, transition_spectrum_value)
from .dynamics import (HBAR_EV_FS, StiffnessError, Trajectory, basis_density, default_grid,
                       eigenstate_density, evolve, from_eigenbasis, fs_to_internal,
                       internal_to_fs, observables, to_eigenbasis)
from .nheig import NearDefectiveError, NHEigensystem, coupling_matrices, decompose
from .nonmarkov import (NMResult, default_nm_grid, default_pairs, nm_measure, optimal_pair,
                        trace_distance)
from .operators import (BathCoupling, HilbertSpace, InvalidModelError, JumpOperator, Mode,
                        SystemModel, ValidityWarning, build_nh, tavis_cummings)
from .oracle import DiscretizedBath, ExactPropagator, discretize, exact_evolve
from .redfield import (FCache, Generator, RelaxationTensor, assemble_generator, br_tensor,
                       brls_tensor, eigen_couplings, secular_rate, secular_rates)
