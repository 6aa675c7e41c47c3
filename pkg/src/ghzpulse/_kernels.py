"""Numba hot paths for the single-qubit multi-mode drive Hamiltonian.

These kernels integrate one RK4 stage of

    dpsi/dt = -i g(t) sigma_x (x) sum_m [a_m^dag e^{i w t} + a_m e^{-i w t}]

for a layout (qubit, mode, ..., mode) with equal mode dimensions d, flat C
order.  State buffers carry a halo of d^(M-1) zeroed entries on both sides
so ladder reads at the Fock edges are weight-zero loads instead of
branches.  Each loop iteration produces the pair (i, i + qubit_stride):
the sigma_x flip makes their gather sets coincide with each other's base
reads, which halves the memory traffic.

Stage fusion: every kernel both writes the next stage input
(tmp = base + a * r) and folds r into the RK4 accumulator, so a full step
is exactly four sweeps.  The "last" kernels write the updated state from
the accumulator directly.

The numpy fallback path in dynamics.py implements the same contraction for
arbitrary layouts; these kernels exist because the four-mode verification
runs are memory bound on a single core.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(f):
            return f

        return wrap if not (args and callable(args[0])) else args[0]


STAGE_FIRST = 0
STAGE_MID = 1
STAGE_LAST = 2


@njit(cache=True, fastmath=True)
def stage_m4(tin, base, tout, acc, cup, cdn, d, astep, wacc, mode, wu, wd, halo):
    S2 = d
    S1 = d * d
    S0 = d * d * d
    qst = S0 * d
    for k0 in range(d):
        for k1 in range(d):
            c0u = cup * wu[k0]
            c0d = cdn * wd[k0]
            c1u = cup * wu[k1]
            c1d = cdn * wd[k1]
            for k2 in range(d):
                c2u = cup * wu[k2]
                c2d = cdn * wd[k2]
                row = halo + k0 * S0 + k1 * S1 + k2 * S2
                if mode == STAGE_FIRST:
                    for k3 in range(d):
                        i = row + k3
                        j = i + qst
                        c3u = cup * wu[k3]
                        c3d = cdn * wd[k3]
                        ri = (c0u * tin[j - S0] + c0d * tin[j + S0]
                              + c1u * tin[j - S1] + c1d * tin[j + S1]
                              + c2u * tin[j - S2] + c2d * tin[j + S2]
                              + c3u * tin[j - 1] + c3d * tin[j + 1])
                        rj = (c0u * tin[i - S0] + c0d * tin[i + S0]
                              + c1u * tin[i - S1] + c1d * tin[i + S1]
                              + c2u * tin[i - S2] + c2d * tin[i + S2]
                              + c3u * tin[i - 1] + c3d * tin[i + 1])
                        tout[i] = base[i] + astep * ri
                        tout[j] = base[j] + astep * rj
                        acc[i] = base[i] + wacc * ri
                        acc[j] = base[j] + wacc * rj
                elif mode == STAGE_MID:
                    for k3 in range(d):
                        i = row + k3
                        j = i + qst
                        c3u = cup * wu[k3]
                        c3d = cdn * wd[k3]
                        ri = (c0u * tin[j - S0] + c0d * tin[j + S0]
                              + c1u * tin[j - S1] + c1d * tin[j + S1]
                              + c2u * tin[j - S2] + c2d * tin[j + S2]
                              + c3u * tin[j - 1] + c3d * tin[j + 1])
                        rj = (c0u * tin[i - S0] + c0d * tin[i + S0]
                              + c1u * tin[i - S1] + c1d * tin[i + S1]
                              + c2u * tin[i - S2] + c2d * tin[i + S2]
                              + c3u * tin[i - 1] + c3d * tin[i + 1])
                        tout[i] = base[i] + astep * ri
                        tout[j] = base[j] + astep * rj
                        acc[i] = acc[i] + wacc * ri
                        acc[j] = acc[j] + wacc * rj
                else:
                    for k3 in range(d):
                        i = row + k3
                        j = i + qst
                        c3u = cup * wu[k3]
                        c3d = cdn * wd[k3]
                        ri = (c0u * tin[j - S0] + c0d * tin[j + S0]
                              + c1u * tin[j - S1] + c1d * tin[j + S1]
                              + c2u * tin[j - S2] + c2d * tin[j + S2]
                              + c3u * tin[j - 1] + c3d * tin[j + 1])
                        rj = (c0u * tin[i - S0] + c0d * tin[i + S0]
                              + c1u * tin[i - S1] + c1d * tin[i + S1]
                              + c2u * tin[i - S2] + c2d * tin[i + S2]
                              + c3u * tin[i - 1] + c3d * tin[i + 1])
                        tout[i] = acc[i] + wacc * ri
                        tout[j] = acc[j] + wacc * rj


@njit(cache=True, fastmath=True)
def stage_m3(tin, base, tout, acc, cup, cdn, d, astep, wacc, mode, wu, wd, halo):
    S1 = d
    S0 = d * d
    qst = S0 * d
    for k0 in range(d):
        for k1 in range(d):
            c0u = cup * wu[k0]
            c0d = cdn * wd[k0]
            c1u = cup * wu[k1]
            c1d = cdn * wd[k1]
            row = halo + k0 * S0 + k1 * S1
            if mode == STAGE_FIRST:
                for k2 in range(d):
                    i = row + k2
                    j = i + qst
                    c2u = cup * wu[k2]
                    c2d = cdn * wd[k2]
                    ri = (c0u * tin[j - S0] + c0d * tin[j + S0]
                          + c1u * tin[j - S1] + c1d * tin[j + S1]
                          + c2u * tin[j - 1] + c2d * tin[j + 1])
                    rj = (c0u * tin[i - S0] + c0d * tin[i + S0]
                          + c1u * tin[i - S1] + c1d * tin[i + S1]
                          + c2u * tin[i - 1] + c2d * tin[i + 1])
                    tout[i] = base[i] + astep * ri
                    tout[j] = base[j] + astep * rj
                    acc[i] = base[i] + wacc * ri
                    acc[j] = base[j] + wacc * rj
            elif mode == STAGE_MID:
                for k2 in range(d):
                    i = row + k2
                    j = i + qst
                    c2u = cup * wu[k2]
                    c2d = cdn * wd[k2]
                    ri = (c0u * tin[j - S0] + c0d * tin[j + S0]
                          + c1u * tin[j - S1] + c1d * tin[j + S1]
                          + c2u * tin[j - 1] + c2d * tin[j + 1])
                    rj = (c0u * tin[i - S0] + c0d * tin[i + S0]
                          + c1u * tin[i - S1] + c1d * tin[i + S1]
                          + c2u * tin[i - 1] + c2d * tin[i + 1])
                    tout[i] = base[i] + astep * ri
                    tout[j] = base[j] + astep * rj
                    acc[i] = acc[i] + wacc * ri
                    acc[j] = acc[j] + wacc * rj
            else:
                for k2 in range(d):
                    i = row + k2
                    j = i + qst
                    c2u = cup * wu[k2]
                    c2d = cdn * wd[k2]
                    ri = (c0u * tin[j - S0] + c0d * tin[j + S0]
                          + c1u * tin[j - S1] + c1d * tin[j + S1]
                          + c2u * tin[j - 1] + c2d * tin[j + 1])
                    rj = (c0u * tin[i - S0] + c0d * tin[i + S0]
                          + c1u * tin[i - S1] + c1d * tin[i + S1]
                          + c2u * tin[i - 1] + c2d * tin[i + 1])
                    tout[i] = acc[i] + wacc * ri
                    tout[j] = acc[j] + wacc * rj


class HaloRk4Workspace:
    """Buffer set for the fused kernels: state in [halo, halo + dim)."""

    def __init__(self, d: int, n_modes: int):
        if n_modes not in (3, 4):
            raise ValueError("fused kernels support 3 or 4 modes")
        self.d = d
        self.n_modes = n_modes
        self.dim = 2 * d**n_modes
        self.halo = d ** (n_modes - 1)
        size = self.dim + 2 * self.halo
        self.psi = np.zeros(size, dtype=np.complex128)
        self.tmp_a = np.zeros(size, dtype=np.complex128)
        self.tmp_b = np.zeros(size, dtype=np.complex128)
        self.acc = np.zeros(size, dtype=np.complex128)
        self.wu = np.sqrt(np.arange(d, dtype=np.float64))
        wd = np.sqrt(np.arange(1, d + 1, dtype=np.float64))
        wd[d - 1] = 0.0  # hard truncation: a annihilates the top Fock level
        self.wd = wd
        self._stage = stage_m4 if n_modes == 4 else stage_m3

    def load(self, amplitudes: np.ndarray):
        self.psi[self.halo:self.halo + self.dim] = amplitudes

    def state(self) -> np.ndarray:
        return self.psi[self.halo:self.halo + self.dim]

    def step(self, dt: float, coef_at):
        """Advance one RK4 step; coef_at(t_offset) -> (cup, cdn) with the
        -i factor of the Schrodinger right-hand side already folded in."""
        stage = self._stage
        d, wu, wd, halo = self.d, self.wu, self.wd, self.halo
        cup, cdn = coef_at(0.0)
        stage(self.psi, self.psi, self.tmp_a, self.acc, cup, cdn, d,
              dt / 2.0, dt / 6.0, STAGE_FIRST, wu, wd, halo)
        cup, cdn = coef_at(dt / 2.0)
        stage(self.tmp_a, self.psi, self.tmp_b, self.acc, cup, cdn, d,
              dt / 2.0, dt / 3.0, STAGE_MID, wu, wd, halo)
        stage(self.tmp_b, self.psi, self.tmp_a, self.acc, cup, cdn, d,
              dt, dt / 3.0, STAGE_MID, wu, wd, halo)
        cup, cdn = coef_at(dt)
        stage(self.tmp_a, self.psi, self.psi, self.acc, cup, cdn, d,
              0.0, dt / 6.0, STAGE_LAST, wu, wd, halo)
