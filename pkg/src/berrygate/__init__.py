"""Simulator and verification library for adiabatic geometric-phase gates on
one and two spin-half qubits.

Conventions: hbar = 1, all angular quantities in rad/s, computational basis
|0> = spin-up and |1> = spin-down, two-qubit basis ordered
{up-up, up-down, down-up, down-down}.
"""

from .bloch import (
    BlochState,
    BlochTrajectory,
    RabiParams,
    bloch_derivative,
    from_rotating_frame,
    integrate_bloch,
    lab_rabi_vector,
    rotating_rabi_vector,
    rotation_z,
    to_rotating_frame,
)
from .gates import (
    controlled_phase,
    equal_up_to_global_phase,
    gate_fidelity,
    hadamard,
    local_phase_equivalence,
    phase_gate,
    prepare_network,
)
from .linalg import expm_hermitian, is_hermitian, is_unitary, pauli, tensor
from .phase import (
    DegenerateSpectrumError,
    LoopSpec,
    PhaseDecomposition,
    berry_cone_phase,
    circle_distance,
    cone_state_path,
    cos_theta_resonance,
    dynamic_phase,
    eigenstate_path,
    geometric_phase_discrete,
    solid_angle_spherical_polygon,
    spinor_of_direction,
    wrap_to_pi,
)
from .schedules import PulseSchedule, Segment, build_cone_loop, pi_pulse
from .schrodinger import (
    SchrodingerTrajectory,
    StepSizeError,
    TwoSpinParams,
    bloch_of_state,
    hamiltonian_1q,
    hamiltonian_2q,
    hamiltonian_2q_full,
    integrate_schrodinger,
    rotating_hamiltonian_1q,
)
from .sequences import (
    AdiabaticityError,
    ConditionalPhaseResult,
    ConePhaseMeasurement,
    ConeRunResult,
    EchoResult,
    FaultToleranceSurface,
    RowPeak,
    conditional_target_gate,
    default_times_1q,
    default_times_2q,
    delta_gamma,
    fault_tolerance_surface,
    hamiltonian_of_schedule_1q,
    measure_cone_phase,
    run_conditional_sequence,
    run_cone_loop,
    run_spin_echo_1q,
    write_peaks_csv,
    write_surface_csv,
)

__version__ = "0.1.0"
