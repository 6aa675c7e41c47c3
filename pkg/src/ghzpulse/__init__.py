"""Pulse design and verification for fast multi-partite entangled-state
generation with longitudinally coupled qubit-resonator systems."""

__version__ = "0.1.0"

from .errors import ConfigError, ConvergenceError, IntegrationError, TruncationError
from .hilbert import (
    DensityMatrix,
    ModeSpec,
    QubitSpec,
    StateVector,
    TensorLayout,
    basis_state,
    coherent_state,
    displaced_mode_dim,
    embed_mode_op,
    embed_qubit_op,
    make_layout,
    partial_trace,
    tensor_state,
)
from .pulses import (
    AuxiliaryTrajectory,
    ConstantPulse,
    FourierPulse,
    PhaseTrajectory,
    auxiliary_from_pulse,
    eval_pulse,
    lagrangian_phase,
)
from .functionals import (
    ConstantCouplingParams,
    GateTrajectories,
    constant_forms,
    displacement,
    gate_A,
    gate_B,
    gate_trajectories,
    sta_amplitude,
)
from .designer import (
    DesignProblem,
    DesignResult,
    OptimizerSettings,
    design_photonic,
    design_qubit,
    design_qubit_minimax,
    gradient_descent,
)
from .dynamics import (
    EvolutionConfig,
    LindbladConfig,
    TrajectoryRecord,
    free_frame_rotation,
    lindblad_evolve,
    schrodinger_evolve,
)
from .targets import (
    TargetSpec,
    photonic_ghz_target,
    qubit_ghz_state,
    qubit_ghz_target,
    rotated_photonic_ghz,
    sm_gate_unitary,
)
from .analysis import (
    FidelityReport,
    WignerGrid,
    default_wigner_axes,
    fidelity,
    populations,
    wigner,
    wigner_marginals,
)
