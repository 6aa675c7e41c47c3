"""State metrics and phase-space analysis: fidelity, Wigner maps, populations."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .errors import ConfigError
from .dynamics import TrajectoryRecord
from .hilbert import DensityMatrix, StateVector

State = Union[StateVector, DensityMatrix]

#: Eigenvalues of density matrices are clamped to zero down to this floor;
#: anything more negative is rejected as genuinely non-positive input.
_PSD_FLOOR = -1e-8


@dataclass(frozen=True)
class FidelityReport:
    """Fidelity value with the evaluation route that produced it."""

    value: float
    method: str  # pure-pure | pure-mixed | mixed-mixed
    global_phase_optimized: bool = True


def _clamped_eigh(rho: np.ndarray):
    evals, evecs = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    if evals.min() < _PSD_FLOOR:
        raise ConfigError(
            f"density matrix eigenvalue {evals.min():.3e} below the {_PSD_FLOOR} floor"
        )
    return np.clip(evals, 0.0, None), evecs


def fidelity(a: State, b: State) -> FidelityReport:
    """State fidelity; squared-overlap convention, so F(rho, rho) = 1.

    pure-pure  |<a|b>|^2
    pure-mixed <psi| rho |psi>
    mixed-mixed (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2 via Hermitian
    eigendecompositions with small-negative eigenvalue clamping.
    """
    if a.layout.dims != b.layout.dims:
        raise ConfigError("fidelity requires matching layouts")
    if isinstance(a, StateVector) and isinstance(b, StateVector):
        val = abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2
        return FidelityReport(float(min(val, 1.0 + 1e-9)), "pure-pure")
    if isinstance(a, StateVector) or isinstance(b, StateVector):
        psi, rho = (a, b) if isinstance(a, StateVector) else (b, a)
        val = float(np.real(np.vdot(psi.amplitudes, rho.matrix @ psi.amplitudes)))
        return FidelityReport(float(np.clip(val, 0.0, 1.0 + 1e-9)), "pure-mixed")
    evals, evecs = _clamped_eigh(a.matrix)
    sqrt_a = (evecs * np.sqrt(evals)) @ evecs.conj().T
    mid = sqrt_a @ b.matrix @ sqrt_a
    mvals, _ = _clamped_eigh(mid)
    val = float(np.sum(np.sqrt(mvals)) ** 2)
    return FidelityReport(float(min(val, 1.0 + 1e-9)), "mixed-mixed")


@dataclass(frozen=True)
class WignerGrid:
    """W sampled on a rectangular grid of phase-space points x + i p.

    values[i, j] = W(xs[i] + 1j * ps[j]).  The displaced-parity convention
    puts a coherent state |alpha> at the point beta = alpha, and the grid
    integral sum(W) dx dp approaches 1 on a window covering the state.
    """

    xs: np.ndarray
    ps: np.ndarray
    values: np.ndarray

    def integral(self) -> float:
        dx = self.xs[1] - self.xs[0]
        dp = self.ps[1] - self.ps[0]
        return float(self.values.sum() * dx * dp)


def default_wigner_axes(d_max: float, n_points: int = 201) -> tuple[np.ndarray, np.ndarray]:
    """Square grid over [-(d_max + 3), d_max + 3]^2."""
    half = abs(d_max) + 3.0
    xs = np.linspace(-half, half, n_points)
    return xs, xs.copy()


def wigner(rho_mode: DensityMatrix, xs: np.ndarray, ps: np.ndarray,
           chunk: int = 4096) -> WignerGrid:
    """Displaced-parity Wigner function of a single-mode density matrix.

    W(beta) = (2/pi) Tr[rho D(beta) P D(-beta)] evaluated through the
    equivalent form (2/pi) Tr[rho D(2 beta) P]; displacement-operator
    columns are built by the stable ladder recurrence, vectorized over
    grid points.
    """
    if rho_mode.layout.n_factors != 1 or rho_mode.layout.n_modes != 1:
        raise ConfigError("wigner expects a single-mode density matrix")
    rho = rho_mode.matrix
    dim = rho.shape[0]
    top = float(np.real(rho[dim - 1, dim - 1]))
    if top > 1e-6:
        warnings.warn(
            f"top Fock level holds population {top:.2e}; Wigner values near "
            "the truncation edge are unreliable",
            stacklevel=2,
        )
    xs = np.asarray(xs, dtype=float)
    ps = np.asarray(ps, dtype=float)
    betas = (xs[:, None] + 1j * ps[None, :]).reshape(-1)
    values = np.empty(betas.shape[0], dtype=float)
    sq = np.sqrt(np.arange(dim, dtype=float))
    for start in range(0, betas.shape[0], chunk):
        blk = 2.0 * betas[start:start + chunk]  # D(2 beta)
        npts = blk.shape[0]
        # column n = 0 of D(alpha): coherent-state amplitudes
        phi = np.zeros((npts, dim), dtype=complex)
        phi[:, 0] = np.exp(-0.5 * np.abs(blk) ** 2)
        for m in range(1, dim):
            phi[:, m] = phi[:, m - 1] * blk / sq[m]
        acc = phi @ rho[0, :]
        sign = -1.0
        prev = phi
        for n in range(1, dim):
            nxt = np.empty_like(prev)
            nxt[:, 0] = -np.conj(blk) * prev[:, 0]
            nxt[:, 1:] = sq[1:] * prev[:, :-1] - np.conj(blk)[:, None] * prev[:, 1:]
            nxt /= sq[n]
            acc = acc + sign * (nxt @ rho[n, :])
            sign = -sign
            prev = nxt
        values[start:start + chunk] = (2.0 / math.pi) * np.real(acc)
    return WignerGrid(xs, ps, values.reshape(xs.shape[0], ps.shape[0]))


def wigner_marginals(grid: WignerGrid) -> tuple[np.ndarray, np.ndarray]:
    """Trapezoid-integrated marginals (P(x), P(p)) of a Wigner grid."""
    dx = grid.xs[1] - grid.xs[0]
    dp = grid.ps[1] - grid.ps[0]
    p_x = np.trapezoid(grid.values, dx=dp, axis=1)
    p_p = np.trapezoid(grid.values, dx=dx, axis=0)
    return p_x, p_p


def _label_to_index(label: str) -> int:
    idx = 0
    for ch in label:
        if ch == "g":
            idx = 2 * idx
        elif ch == "e":
            idx = 2 * idx + 1
        else:
            raise ConfigError(f"population label {label!r} must use only g/e")
    return idx


def populations(record: TrajectoryRecord, labels: Sequence[str]) -> dict[str, np.ndarray]:
    """Computational-basis qubit populations over time, modes traced out.

    labels are strings over {g, e}, first qubit first, e.g. 'ge' for qubit 0
    ground and qubit 1 excited.
    """
    n_qubits = int(round(math.log2(record.qubit_probs.shape[1])))
    out = {}
    for label in labels:
        if len(label) != n_qubits:
            raise ConfigError(
                f"label {label!r} has {len(label)} characters for {n_qubits} qubits"
            )
        out[label] = record.qubit_probs[:, _label_to_index(label)].copy()
    return out
