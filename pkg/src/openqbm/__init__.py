"""Open quantum Brownian motion of a scalar field mode in a thermal bath.

Bath kernels, the Feynman-Vernon influence functional with a brute-force
path-sum oracle, the high-temperature master equation on a position grid,
its Wigner-space transport counterpart, and shared diagnostics.
"""
from . import _backend
from .cl_evolve import (DensityMatrixGrid, GridSpec, MasterTerms, Potential, evolve,
                        initial_jolt, jolt_constant, liouvillian_apply, make_cat,
                        make_gaussian, stability_bounds, step)
from .errors import (BudgetExceededError, ConfigError, InfraredDivergenceError,
                     NumericalError, OpenQBMError, QuadratureError, StabilityError)
from .influence import (DiscretePath, influence_functional, influence_matrices,
                        sliced_propagator_oracle)
from .kernels import (Continuum, Discrete, KernelSet, dissipation_kernel,
                      eval_spectral_density, etabar, etabar0, kernel_set, mass_shift,
                      noise_kernel, ohmic_highT_kernel_set, ohmic_highT_reference)
from .observables import ObservableRecord, observe_rho, observe_wigner, write_series
from .wigner import (TransportTerms, WignerGrid, apply_wigner_jolt, c_gamma, evolve_wigner,
                     inverse_wigner, moment_ode_oracle, transport_step, wigner_transform)

__version__ = "0.1.0"
BACKEND = _backend.NAME
