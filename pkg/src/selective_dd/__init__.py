"""Selective dynamical decoupling in multilevel systems with 2pi phase-flip pulses."""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .linalg import (  # noqa: F401
    block_split,
    commutator,
    exp_hermitian_generator,
    frobenius_norm,
    is_hermitian,
    is_unitary,
    principal_log_unitary,
)
from .system import (  # noqa: F401
    LevelSystem,
    PulsePlan,
    coupling_decomposition,
    pulse_operator,
    rotated_hamiltonian,
    target_hamiltonian,
)
from .sequences import PulseSequence, exact_n2, family_n4, pulse_times, uhrig, validate  # noqa: F401
from .magnus import (  # noqa: F401
    closed_form_vs_oracle,
    omega_sum,
    piecewise_generator,
    second_order_coefficient,
    third_order_coefficients,
)
from .solver import residuals, search_full_third_order, solve_n2, sweep_family_n4  # noqa: F401
from .evaluator import effective_hamiltonian, evaluate, exact_propagator, scaling_study  # noqa: F401
