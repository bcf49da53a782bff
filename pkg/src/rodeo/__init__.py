"""Quantum jump unravelings of time-local master equations via a generalized rate operator."""

from .errors import Breakdown, NegativeRate, NumericalGuard, SchemaError, StepTooLarge
from .exact import evolve_exact, positivity_monitor, propagator_choi
from .jump_mc import TrajectoryConfig, run_ensemble, run_trajectory
from .model import CoefficientFn, MasterEquation, basis_state, density, pauli_model
from .nmqj import NMQJConfig, run_nmqj
from .observables import bloch, bloch_series, compare
from .rateop import Custom, StateScaled, TargetBasis, Zero, build_rate_operator

__version__ = "0.1.0"
