"""Reference states and gates the designed pulses should realize.

Phase conventions are explicit because they are the only genuinely
ambiguous part of these constructions:

* The hybrid qubit-mode cat target is defined as the exact image of the
  branch-resolved displacement propagator acting on |g> (x) |vac>^M, i.e.
  (|+> (x)_m |alpha> + |-> (x)_m |-alpha>) / sqrt(2) with |+-> the sigma_x
  eigenstates.  Defining the target through the propagator makes it
  labeling-convention free.
* The qubit register target is (|g...g> + e^{i phi} |e...e>) / sqrt(2)
  with phi = pi (N+1) / 2, or its complex conjugate phase when
  conjugate_phase=True.  The conjugate member is the one reached when the
  designed pair phase is realized with the opposite loop orientation; the
  two are related by a single sigma_z relabeling of any one qubit, and
  fidelity reports carry both numbers.
* sm_gate_unitary(N, theta) = prod_{n<n'} [cos(theta) I - i sin(theta)
  sigma_x_n sigma_x_n'], so sm_gate_unitary(2, pi/4)|gg> equals
  qubit_ghz_target(2) exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigError
from .hilbert import StateVector, TensorLayout, coherent_state, tensor_state

#: exp(-i pi sigma_y / 4) in the (|g>, |e>) basis.
HADAMARD_LIKE_Y = np.array([[1.0, 1.0], [-1.0, 1.0]], dtype=complex) / math.sqrt(2.0)

_PLUS = np.array([1.0, 1.0], dtype=complex) / math.sqrt(2.0)
_MINUS = np.array([1.0, -1.0], dtype=complex) / math.sqrt(2.0)


@dataclass(frozen=True)
class TargetSpec:
    """Named target selection used by configuration files."""

    kind: str
    alpha: complex = 0.0
    n_qubits: int = 0
    conjugate_phase: bool = False

    def __post_init__(self):
        if self.kind not in ("photonic_ghz", "rotated_photonic_ghz", "qubit_ghz"):
            raise ConfigError(f"unknown target kind {self.kind!r}")


def photonic_ghz_target(layout: TensorLayout, alpha: complex) -> StateVector:
    """Hybrid cat state (|+>|alpha..> + |->|-alpha..>)/sqrt(2).

    Exact interaction-frame image of the displacement propagator applied to
    |g> (x) vacuum.  Requires a single qubit; every mode receives the same
    amplitude.  The sigma_x branches are orthogonal, so the state is
    normalized regardless of the +-alpha overlap.
    """
    if layout.n_qubits != 1 or layout.n_modes < 1:
        raise ConfigError("photonic target needs exactly one qubit and >= 1 mode")
    branches = []
    for q_vec, sign in ((_PLUS, 1.0), (_MINUS, -1.0)):
        vec = q_vec.copy()
        for m in range(layout.n_modes):
            d = layout.dims[layout.mode_factor(m)]
            vec = np.kron(vec, coherent_state(d, sign * alpha))
        branches.append(vec)
    psi = (branches[0] + branches[1]) / math.sqrt(2.0)
    return StateVector(psi, layout, normalize=True)


def rotated_photonic_ghz(layout: TensorLayout, alpha: complex) -> StateVector:
    """Qubit y-rotation of the hybrid cat, exposing even/odd cat branches.

    Applying exp(-i pi sigma_y / 4) maps the |+-> branch labels onto |g>,
    |e>, so the mode part conditioned on a sigma_x eigenstate of the
    rotated state is a normalized even or odd cat.
    """
    base = photonic_ghz_target(layout, alpha)
    psi = np.tensordot(HADAMARD_LIKE_Y, base.tensor_view(), axes=([1], [0]))
    return StateVector(psi.reshape(-1), layout, normalize=True)


def qubit_ghz_target(n_qubits: int, conjugate_phase: bool = False) -> np.ndarray:
    """Qubit-register GHZ amplitudes (|g..g> + e^{i phi}|e..e>)/sqrt(2).

    phi = pi (N+1)/2, negated for conjugate_phase.  Returned over the bare
    2^N register; tensor with the mode vacuum for full-layout comparisons.
    """
    if n_qubits < 2:
        raise ConfigError("GHZ register needs at least two qubits")
    phi = math.pi * (n_qubits + 1) / 2.0
    if conjugate_phase:
        phi = -phi
    vec = np.zeros(2**n_qubits, dtype=complex)
    vec[0] = 1.0 / math.sqrt(2.0)
    vec[-1] = np.exp(1j * phi) / math.sqrt(2.0)
    return vec


def qubit_ghz_state(layout: TensorLayout, conjugate_phase: bool = False) -> StateVector:
    """GHZ register tensored with every mode in vacuum, over a full layout."""
    reg = qubit_ghz_target(layout.n_qubits, conjugate_phase)
    vec = reg
    for m in range(layout.n_modes):
        d = layout.dims[layout.mode_factor(m)]
        vac = np.zeros(d, dtype=complex)
        vac[0] = 1.0
        vec = np.kron(vec, vac)
    return StateVector(vec, layout)


def sm_gate_unitary(n_qubits: int, theta_pair: float) -> np.ndarray:
    """All-pairs entangling gate prod_{n<n'} exp(-i theta sigma_x_n sigma_x_n').

    All factors commute, so the product order is irrelevant.  theta_pair is
    the phase per unordered qubit pair; the full drive realizes
    theta_pair = 2 B(t_f) when A(t_f) = 0.
    """
    if n_qubits < 2:
        raise ConfigError("gate needs at least two qubits")
    if n_qubits > 10:
        raise ConfigError("dense gate construction capped at 10 qubits")
    dim = 2**n_qubits
    u = np.eye(dim, dtype=complex)
    c, s = math.cos(theta_pair), math.sin(theta_pair)
    for i in range(n_qubits):
        for j in range(i + 1, n_qubits):
            ut = u.reshape((2,) * n_qubits + (dim,))
            flipped = np.flip(np.flip(ut, axis=i), axis=j).reshape(dim, dim)
            u = c * u - 1j * s * flipped
    return u
