"""Condensate kinetics in the stochastic limit: Bogoliubov spectrum, Landau
stability, ideal-gas condensation and the linear / quadratic master
equations for the condensate momentum density."""

from .errors import (DivergenceError, DivergentOccupationError, GridMismatchError,
                     InvalidConfigurationError, ModelInconsistencyError, NoSoundSpeedError,
                     NumericalFailure, SingularModeError, StepSizeError, StochfluidError)
from .grid import (DensityField, MomentumGrid, default_sigma, integrate, make_grid,
                   mollified_delta)
from .dispersion import (BogoliubovBulk, DispersionModel, FormFactor, Free, InteractionKernel,
                         PhysicalParams, Polaron, Radiative, Tabulated, bogoliubov_dispersion,
                         energy_difference, epsilon, sound_speed)
from .bogoliubov import (BogoliubovCoeffs, QuadraticHamiltonianPoint, chemical_potential,
                         coeffs, compensation_x, diagonal_coefficient, diagonalize,
                         ground_state_energy, offdiagonal_residual)
from .condensation import (CondensateState, bose_occupation, condensate_fraction,
                           critical_temperature, normal_density)
from .landau import StabilityReport, critical_velocity, stability_margin
from .kinetics import (SELF_CONSISTENT, EvolutionConfig, RateKernel, ReservoirSpec,
                       SuperfluidityReport, Susceptibility, Trajectory, apply_identification,
                       emission_loss_rate, evolve, leakage_bound, linear_rhs, nonlinear_rhs,
                       rate_kernel, step, superfluidity_check, susceptibility)

__version__ = "0.1.0"
