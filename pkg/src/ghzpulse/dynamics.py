"""Time-dependent propagation: closed Schrodinger and open Lindblad runs.

Closed runs integrate  i d|psi>/dt = H(t)|psi>  with a fixed-step classical
4th-order Runge-Kutta scheme.  In the interaction frame the Hamiltonian is

    H_I(t) = g(t) sum_n sigma_x_n sum_m [a_m^dag e^{i w_m t} + a_m e^{-i w_m t}]

(the qubit free term commutes with sigma_x and drops); in the lab frame the
free qubit and mode terms are kept explicitly.  Open runs integrate the
master equation

    drho/dt = -i[H, rho] + sum_m kappa_m L[a_m]
            + sum_n (gamma_n L[lower_n] + gamma_phi_n L[dephase_n])

with L[O] rho = O rho O^dag - {O^dag O, rho}/2.  The lowering and dephasing
operators are taken either literally in the computational basis
('z-basis-literal') or re-expressed in the eigenbasis of the sigma_x free
qubit term ('energy-eigenbasis'), where relaxation connects the actual
energy eigenstates.  In the interaction frame only the energy-eigenbasis
choice is frame invariant, so the literal basis is restricted to lab runs.

No adaptive stepping: fixed dt keeps runs deterministic and makes
step-halving convergence checks meaningful.  Norm (trace) drift beyond
1e-6 aborts the run with advice to shrink dt.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError, IntegrationError
from .hilbert import (
    SIGMA_LOWER,
    SIGMA_X,
    SIGMA_Z,
    DensityMatrix,
    StateVector,
    TensorLayout,
    mode_ladder,
)
from .pulses import Pulse
from . import _kernels

#: Minimum temporal resolution: steps per mode period.
STEPS_PER_PERIOD = 200

#: Relaxation in the sigma_x eigenbasis: |minus><plus| in (|g>, |e>).
SIGMA_LOWER_ENERGY = 0.5 * np.array([[1.0, 1.0], [-1.0, -1.0]], dtype=complex)


@dataclass(frozen=True)
class EvolutionConfig:
    """Propagation settings.

    dt=None resolves to the largest step satisfying the resolution bound
    dt <= min_m (2 pi / w_m) / 200, adjusted so t_f / dt is an integer.
    """

    t_f: float
    dt: Optional[float] = None
    frame: str = "interaction"
    record_stride: Optional[int] = None
    renormalize: bool = False
    record_states: bool = False

    def __post_init__(self):
        if self.frame not in ("interaction", "lab"):
            raise ConfigError(f"unknown frame {self.frame!r}")
        if not self.t_f > 0:
            raise ConfigError("t_f must be positive")

    def resolve_steps(self, layout: TensorLayout) -> tuple[int, float]:
        """Number of steps and the exact dt used."""
        periods = [2.0 * math.pi / m.frequency for m in layout.modes]
        if self.frame == "lab":
            periods += [2.0 * math.pi / q.frequency for q in layout.qubits]
        if not periods:
            periods = [2.0 * math.pi / q.frequency for q in layout.qubits]
        cap = min(periods) / STEPS_PER_PERIOD
        if self.dt is None:
            n = max(1, math.ceil(self.t_f / cap - 1e-12))
            return n, self.t_f / n
        if self.dt > cap * (1.0 + 1e-9):
            raise ConfigError(
                f"dt={self.dt:.3e} exceeds the resolution bound {cap:.3e} "
                f"({STEPS_PER_PERIOD} steps per fastest period)"
            )
        n = round(self.t_f / self.dt)
        if n < 1 or abs(n * self.dt - self.t_f) > 1e-6 * self.t_f:
            raise ConfigError("t_f must be an integer multiple of dt")
        return n, self.t_f / n


@dataclass(frozen=True)
class LindbladConfig:
    """Decay and dephasing rates (angular rad/s) and the dissipator basis."""

    kappa: tuple[float, ...] = ()
    gamma: tuple[float, ...] = ()
    gamma_phi: tuple[float, ...] = ()
    dissipator_basis: str = "energy-eigenbasis"

    def __post_init__(self):
        if self.dissipator_basis not in ("energy-eigenbasis", "z-basis-literal"):
            raise ConfigError(f"unknown dissipator basis {self.dissipator_basis!r}")
        for name in ("kappa", "gamma", "gamma_phi"):
            if any(r < 0 for r in getattr(self, name)):
                raise ConfigError(f"{name} rates must be >= 0")


@dataclass
class TrajectoryRecord:
    """Recorded scalar observables plus the final state.

    norms holds the state norm for closed runs and the trace for open runs.
    qubit_probs[k] is the computational-basis probability vector of the
    qubit register (mode factors traced out) at record k.
    """

    times: np.ndarray
    norms: np.ndarray
    qubit_probs: np.ndarray
    mode_amps: np.ndarray
    branch_plus_amps: Optional[np.ndarray]
    states: Optional[list]
    final_state: Union[StateVector, DensityMatrix]
    frame: str


# ---------------------------------------------------------------------------
# Closed-system propagation
# ---------------------------------------------------------------------------

class _GenericApplier:
    """RHS = -i H(t) psi by factor-wise contraction; any layout, any frame."""

    def __init__(self, layout: TensorLayout, pulse: Pulse, frame: str):
        self.layout = layout
        self.pulse = pulse
        self.frame = frame
        self.dims = layout.dims
        nfac = layout.n_factors
        self.mode_info = []
        for m in range(layout.n_modes):
            axis = layout.mode_factor(m)
            d = layout.dims[axis]
            w_up = np.sqrt(np.arange(1, d, dtype=float))
            shape = [1] * nfac
            shape[axis] = d - 1
            self.mode_info.append(
                (axis, layout.modes[m].frequency, w_up.reshape(shape))
            )
        self.lo_slices = {}
        self.hi_slices = {}
        for axis, _, _ in self.mode_info:
            d = layout.dims[axis]
            lo = [slice(None)] * nfac
            hi = [slice(None)] * nfac
            lo[axis] = slice(0, d - 1)
            hi[axis] = slice(1, d)
            self.lo_slices[axis] = tuple(lo)
            self.hi_slices[axis] = tuple(hi)
        if frame == "lab":
            diag = np.zeros(layout.dims, dtype=float)
            for axis, w_m, _ in self.mode_info:
                d = layout.dims[axis]
                shape = [1] * nfac
                shape[axis] = d
                diag = diag + w_m * np.arange(d, dtype=float).reshape(shape)
            self.lab_diag = diag

    def rhs(self, psi_flat: np.ndarray, t: float) -> np.ndarray:
        psi = psi_flat.reshape(self.dims)
        g_t = float(self.pulse.value(t))
        chi = np.zeros_like(psi)
        for axis, w_m, w_up in self.mode_info:
            lo, hi = self.lo_slices[axis], self.hi_slices[axis]
            if self.frame == "interaction":
                up, dn = np.exp(1j * w_m * t), np.exp(-1j * w_m * t)
            else:
                up, dn = 1.0, 1.0
            chi[hi] += up * (w_up * psi[lo])  # a^dag
            chi[lo] += dn * (w_up * psi[hi])  # a
        out = np.zeros_like(psi)
        for n in range(self.layout.n_qubits):
            out += np.flip(chi, axis=n)
        out *= -1j * g_t
        if self.frame == "lab":
            for n, q in enumerate(self.layout.qubits):
                out += (-0.5j * q.frequency) * np.flip(psi, axis=n)
            out += -1j * (self.lab_diag * psi)
        return out.reshape(-1)


def _qubit_probability_vector(psi_flat: np.ndarray, layout: TensorLayout) -> np.ndarray:
    nq = layout.n_qubits
    if nq == 0:
        return np.array([1.0])
    probs = np.abs(psi_flat.reshape(2**nq, -1)) ** 2
    return probs.sum(axis=1)


def _mode_amplitude(psi_flat: np.ndarray, layout: TensorLayout, m: int) -> complex:
    axis = layout.mode_factor(m)
    d = layout.dims[axis]
    psi = psi_flat.reshape(layout.dims)
    lo = [slice(None)] * layout.n_factors
    hi = [slice(None)] * layout.n_factors
    lo[axis] = slice(0, d - 1)
    hi[axis] = slice(1, d)
    shape = [1] * layout.n_factors
    shape[axis] = d - 1
    w = np.sqrt(np.arange(1, d, dtype=float)).reshape(shape)
    return complex(np.sum(psi[tuple(lo)].conj() * (w * psi[tuple(hi)])))


def _branch_plus_amplitudes(psi_flat: np.ndarray, layout: TensorLayout) -> np.ndarray:
    """<a_m> conditioned on the +1 sigma_x branch of qubit 0 (single qubit)."""
    psi = psi_flat.reshape(layout.dims)
    plus = 0.5 * (psi + np.flip(psi, axis=0))
    flat = plus.reshape(-1)
    weight = float(np.vdot(flat, flat).real)
    if weight < 1e-12:
        return np.full(layout.n_modes, np.nan, dtype=complex)
    return np.array(
        [_mode_amplitude(flat, layout, m) / weight for m in range(layout.n_modes)]
    )


def _fast_path_ok(layout: TensorLayout, config: EvolutionConfig) -> bool:
    if not _kernels.HAVE_NUMBA or config.frame != "interaction":
        return False
    if layout.n_qubits != 1 or layout.n_modes not in (3, 4):
        return False
    dims = {m.truncation_dim for m in layout.modes}
    freqs = {m.frequency for m in layout.modes}
    return len(dims) == 1 and len(freqs) == 1


def schrodinger_evolve(
    layout: TensorLayout,
    pulse: Pulse,
    initial: StateVector,
    config: EvolutionConfig,
) -> TrajectoryRecord:
    """Propagate a pure state and record norm, populations and <a_m>.

    Raises IntegrationError if the norm drifts from 1 by more than 1e-6
    (renormalization is off by default: drift is a step-size diagnostic).
    """
    if initial.layout.dims != layout.dims:
        raise ConfigError("initial state layout does not match")
    if abs(pulse.t_f - config.t_f) > 1e-15 + 1e-9 * config.t_f:
        raise ConfigError("pulse duration and config t_f disagree")
    n_steps, dt = config.resolve_steps(layout)
    stride = config.record_stride or max(1, n_steps // 200)

    rec_t, rec_norm, rec_probs, rec_amps, rec_branch, rec_states = [], [], [], [], [], []
    track_branch = layout.n_qubits == 1

    def record(step: int, psi_flat: np.ndarray):
        t = step * dt
        nrm = float(np.linalg.norm(psi_flat))
        if abs(nrm - 1.0) > 1e-6:
            raise IntegrationError(
                f"norm drift {abs(nrm - 1.0):.2e} at t={t:.3e}s exceeds 1e-6; "
                "reduce dt"
            )
        rec_t.append(t)
        rec_norm.append(nrm)
        rec_probs.append(_qubit_probability_vector(psi_flat, layout))
        rec_amps.append(
            [_mode_amplitude(psi_flat, layout, m) for m in range(layout.n_modes)]
        )
        if track_branch:
            rec_branch.append(_branch_plus_amplitudes(psi_flat, layout))
        if config.record_states:
            rec_states.append(StateVector(psi_flat, layout, normalize=False))

    if _fast_path_ok(layout, config):
        d = layout.modes[0].truncation_dim
        w_m = layout.modes[0].frequency
        ws = _kernels.HaloRk4Workspace(d, layout.n_modes)
        ws.load(initial.amplitudes)
        record(0, ws.state())
        for step in range(n_steps):
            t0 = step * dt

            def coef_at(off: float):
                t = t0 + off
                g_t = float(pulse.value(t))
                cup = -1j * g_t * np.exp(1j * w_m * t)
                return np.complex128(cup), np.complex128(-np.conj(cup))

            ws.step(dt, coef_at)
            if config.renormalize:
                v = ws.state()
                v /= np.linalg.norm(v)
            if (step + 1) % stride == 0 or step + 1 == n_steps:
                record(step + 1, ws.state())
        final_flat = ws.state().copy()
    else:
        applier = _GenericApplier(layout, pulse, config.frame)
        psi = initial.amplitudes.astype(complex).copy()
        record(0, psi)
        for step in range(n_steps):
            t0 = step * dt
            k1 = applier.rhs(psi, t0)
            k2 = applier.rhs(psi + (0.5 * dt) * k1, t0 + 0.5 * dt)
            k3 = applier.rhs(psi + (0.5 * dt) * k2, t0 + 0.5 * dt)
            k4 = applier.rhs(psi + dt * k3, t0 + dt)
            psi += (dt / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
            if config.renormalize:
                psi /= np.linalg.norm(psi)
            if (step + 1) % stride == 0 or step + 1 == n_steps:
                record(step + 1, psi)
        final_flat = psi

    final_state = StateVector(final_flat / np.linalg.norm(final_flat), layout)
    return TrajectoryRecord(
        times=np.asarray(rec_t),
        norms=np.asarray(rec_norm),
        qubit_probs=np.asarray(rec_probs),
        mode_amps=np.asarray(rec_amps, dtype=complex),
        branch_plus_amps=np.asarray(rec_branch) if track_branch else None,
        states=rec_states if config.record_states else None,
        final_state=final_state,
        frame=config.frame,
    )


# ---------------------------------------------------------------------------
# Open-system propagation
# ---------------------------------------------------------------------------

DENSITY_DIM_CAP = 512


def _sparse_embed(layout: TensorLayout, axis: int, local: np.ndarray) -> sp.csr_array:
    op = sp.csr_array(np.eye(1, dtype=complex))
    for ax, d in enumerate(layout.dims):
        blk = sp.csr_array(local) if ax == axis else sp.identity(d, dtype=complex, format="csr")
        op = sp.kron(op, blk, format="csr")
    return sp.csr_array(op)


def _collapse_operators(layout: TensorLayout, lindblad: LindbladConfig) -> list[sp.csr_array]:
    nq, nm = layout.n_qubits, layout.n_modes
    kappa = lindblad.kappa or (0.0,) * nm
    gamma = lindblad.gamma or (0.0,) * nq
    gamma_phi = lindblad.gamma_phi or (0.0,) * nq
    if len(kappa) != nm or len(gamma) != nq or len(gamma_phi) != nq:
        raise ConfigError("rate tuple lengths must match the layout")
    energy = lindblad.dissipator_basis == "energy-eigenbasis"
    lower = SIGMA_LOWER_ENERGY if energy else SIGMA_LOWER
    dephase = SIGMA_X if energy else SIGMA_Z
    ops = []
    for m, rate in enumerate(kappa):
        if rate > 0:
            local = mode_ladder(layout.dims[layout.mode_factor(m)], "a")
            ops.append(math.sqrt(rate) * _sparse_embed(layout, layout.mode_factor(m), local))
    for n, rate in enumerate(gamma):
        if rate > 0:
            ops.append(math.sqrt(rate) * _sparse_embed(layout, n, lower))
    for n, rate in enumerate(gamma_phi):
        if rate > 0:
            ops.append(math.sqrt(rate) * _sparse_embed(layout, n, dephase))
    return ops


class _LindbladRhs:
    def __init__(self, layout: TensorLayout, pulse: Pulse, config: EvolutionConfig,
                 lindblad: LindbladConfig):
        self.pulse = pulse
        self.frame = config.frame
        x_parts = []
        for m in range(layout.n_modes):
            axis = layout.mode_factor(m)
            a_loc = mode_ladder(layout.dims[axis], "a")
            a_emb = _sparse_embed(layout, axis, a_loc)
            sx_sum = None
            for n in range(layout.n_qubits):
                sx = _sparse_embed(layout, n, SIGMA_X)
                sx_sum = sx if sx_sum is None else sx_sum + sx
            p_m = sp.csr_array(sx_sum @ a_emb)
            x_parts.append((layout.modes[m].frequency, p_m, sp.csr_array(p_m.conj().T)))
        self.coupling = x_parts  # (omega_m, P_m, P_m^dag), P_m = sum_n sx_n a_m
        if self.frame == "lab":
            h0 = sp.csr_array((layout.dim, layout.dim), dtype=complex)
            for n, q in enumerate(layout.qubits):
                h0 = h0 + 0.5 * q.frequency * _sparse_embed(layout, n, SIGMA_X)
            for m, spec in enumerate(layout.modes):
                axis = layout.mode_factor(m)
                n_loc = mode_ladder(layout.dims[axis], "n")
                h0 = h0 + spec.frequency * _sparse_embed(layout, axis, n_loc)
            self.h_static = sp.csr_array(h0)
            drive = None
            for _, p_m, p_dag in x_parts:
                term = p_m + p_dag
                drive = term if drive is None else drive + term
            self.h_drive = sp.csr_array(drive)
        else:
            if lindblad.dissipator_basis != "energy-eigenbasis":
                raise ConfigError(
                    "interaction-frame open runs require the energy-eigenbasis "
                    "dissipator choice (the literal basis is not frame invariant)"
                )
            self.h_static = None
        cops = _collapse_operators(layout, lindblad)
        self.dissipators = cops
        d_sum = None
        for o in cops:
            term = sp.csr_array(o.conj().T @ o)
            d_sum = term if d_sum is None else d_sum + term
        self.d_sum = sp.csr_array(d_sum) if d_sum is not None else None

    def __call__(self, rho: np.ndarray, t: float) -> np.ndarray:
        g_t = float(self.pulse.value(t))
        if self.frame == "lab":
            x = self.h_static @ rho + g_t * (self.h_drive @ rho)
        else:
            x = np.zeros_like(rho)
            for w_m, p_m, p_dag in self.coupling:
                dn = g_t * np.exp(-1j * w_m * t)
                x = x + dn * (p_m @ rho) + np.conj(dn) * (p_dag @ rho)
        out = -1j * (x - x.conj().T)
        for o in self.dissipators:
            y = o @ rho
            out += (o @ y.conj().T).conj().T
        if self.d_sum is not None:
            z = self.d_sum @ rho
            out -= 0.5 * (z + z.conj().T)
        return out


def lindblad_evolve(
    layout: TensorLayout,
    pulse: Pulse,
    initial: DensityMatrix,
    config: EvolutionConfig,
    lindblad: LindbladConfig,
    dim_cap: int = DENSITY_DIM_CAP,
) -> TrajectoryRecord:
    """Propagate a density matrix under coherent drive plus dissipation.

    The default frame for open runs is the lab frame with the Hamiltonian
    kept verbatim; rotate the result with free_frame_rotation() before
    comparing against interaction-frame targets.  Trace drift beyond 1e-6
    or eigenvalues below -1e-6 abort the run.
    """
    if layout.dim > dim_cap:
        raise ConfigError(
            f"density-matrix run at dim {layout.dim} exceeds the cap {dim_cap}; "
            "raise dim_cap explicitly if intended"
        )
    if initial.layout.dims != layout.dims:
        raise ConfigError("initial state layout does not match")
    n_steps, dt = config.resolve_steps(layout)
    stride = config.record_stride or max(1, n_steps // 200)
    rhs = _LindbladRhs(layout, pulse, config, lindblad)

    rho = initial.matrix.astype(complex).copy()
    rec_t, rec_tr, rec_probs, rec_amps, rec_states = [], [], [], [], []
    mode_ops = [
        _sparse_embed(layout, layout.mode_factor(m), mode_ladder(layout.dims[layout.mode_factor(m)], "a"))
        for m in range(layout.n_modes)
    ]

    def record(step: int, rho_now: np.ndarray):
        t = step * dt
        tr = float(np.trace(rho_now).real)
        if abs(tr - 1.0) > 1e-6:
            raise IntegrationError(
                f"trace drift {abs(tr - 1.0):.2e} at t={t:.3e}s exceeds 1e-6; reduce dt"
            )
        evals = np.linalg.eigvalsh(0.5 * (rho_now + rho_now.conj().T))
        if evals.min() < -1e-6:
            raise IntegrationError(
                f"negative population {evals.min():.2e} at t={t:.3e}s; reduce dt"
            )
        rec_t.append(t)
        rec_tr.append(tr)
        diag = np.real(np.diag(rho_now))
        nq = layout.n_qubits
        rec_probs.append(diag.reshape(2**nq, -1).sum(axis=1) if nq else np.array([1.0]))
        rec_amps.append([complex((op.multiply(rho_now.T)).sum()) for op in mode_ops])
        if config.record_states:
            rec_states.append(DensityMatrix(rho_now, layout, validate=False))

    record(0, rho)
    for step in range(n_steps):
        t0 = step * dt
        k1 = rhs(rho, t0)
        k2 = rhs(rho + (0.5 * dt) * k1, t0 + 0.5 * dt)
        k3 = rhs(rho + (0.5 * dt) * k2, t0 + 0.5 * dt)
        k4 = rhs(rho + dt * k3, t0 + dt)
        rho += (dt / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
        if (step + 1) % stride == 0 or step + 1 == n_steps:
            record(step + 1, rho)

    rho = 0.5 * (rho + rho.conj().T)
    final = DensityMatrix(rho, layout, validate=False)
    return TrajectoryRecord(
        times=np.asarray(rec_t),
        norms=np.asarray(rec_tr),
        qubit_probs=np.asarray(rec_probs),
        mode_amps=np.asarray(rec_amps, dtype=complex),
        branch_plus_amps=None,
        states=rec_states if config.record_states else None,
        final_state=final,
        frame=config.frame,
    )


def free_frame_rotation(layout: TensorLayout, t: float) -> np.ndarray:
    """Diagonal-in-eigenbasis free propagator U0(t) = exp(-i H_0 t).

    H_0 = sum_n (Omega_n/2) sigma_x_n + sum_m w_m n_m.  Returned dense;
    apply as U0^dag rho U0 to pull a lab-frame result back into the
    interaction frame.
    """
    u = np.eye(1, dtype=complex)
    for q in layout.qubits:
        h_loc = 0.5 * q.frequency * SIGMA_X
        evals, evecs = np.linalg.eigh(h_loc)
        u_loc = (evecs * np.exp(-1j * evals * t)) @ evecs.conj().T
        u = np.kron(u, u_loc)
    for m_spec in layout.modes:
        d = m_spec.truncation_dim
        u_loc = np.diag(np.exp(-1j * m_spec.frequency * t * np.arange(d)))
        u = np.kron(u, u_loc)
    return u
