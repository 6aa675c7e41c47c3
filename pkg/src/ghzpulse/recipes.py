"""Canned experiment drivers with the reference parameter set.

Every quantitative claim the package verifies lives here with its exact
parameters, so the command line, the test suite, and ad hoc scripts all
run the same experiments.

Reference system parameters (linear frequencies as quoted, converted to
angular internally):

photonic branch   one qubit, M modes at w/2pi = 6.6 GHz, pulse duration
                  t_f = 3.74 ns (from the reference coupling scale
                  g/2pi = 21 MHz via t_f = pi / (40 g)).
qubit branch      N qubits at Omega/2pi = 10 GHz, one bus mode at
                  w/2pi = 1 GHz, t_f = 1.89 ns (reference coupling
                  g/2pi = 144 MHz via t_f = pi w / (80 g^2)).
dissipation       kappa = 1e6 1/s per mode, gamma = 1/T1, gamma_phi = 1/T2
                  with T1 = T2 = 40 us.  The quoted "per 2 pi" decorations
                  on these rates are read as plain inverse-time values;
                  that reading reproduces the benchmark fidelities and is
                  recorded in the convention ledger of every report.

Pair-phase convention (frozen by calibrate_pair_phase_convention): with
A(t_f) = 0 the drive realizes the all-pairs gate with phase
theta_pair = 2 B(t_f) per unordered pair, so GHZ generation targets
|B(t_f)| = pi/8, not pi/4.  The natural loop orientation of sine-series
pulses gives B(t_f) < 0, which lands on the GHZ with the conjugated
relative phase exp(-i pi (N+1)/2); both phase conventions appear in every
fidelity report.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .analysis import fidelity, populations
from .designer import (
    DesignProblem,
    DesignResult,
    design_photonic,
    design_qubit,
    design_qubit_minimax,
)
from .dynamics import (
    EvolutionConfig,
    LindbladConfig,
    TrajectoryRecord,
    free_frame_rotation,
    lindblad_evolve,
    schrodinger_evolve,
)
from .errors import IntegrationError
from .hilbert import (
    DensityMatrix,
    ModeSpec,
    QubitSpec,
    StateVector,
    basis_state,
    displaced_mode_dim,
    make_layout,
    VACUUM_MODE_DIM,
)
from .pulses import ConstantPulse, FourierPulse
from .targets import photonic_ghz_target, qubit_ghz_state

TWO_PI = 2.0 * math.pi

PHOTONIC_OMEGA = TWO_PI * 6.6e9
PHOTONIC_T_F = 3.74e-9
QUBIT_FREQ = TWO_PI * 10e9
BUS_OMEGA = TWO_PI * 1e9
QUBIT_T_F = 1.89e-9

#: Frozen GHZ design target for the pair phase functional (see module doc).
GHZ_B_TARGET = -math.pi / 8.0

#: Minimum sine terms for the GHZ pulse; enough freedom to flatten |A(t)|.
GHZ_K_TERMS = 24

CAVITY_KAPPA = 1.0e6          # 1/s
QUBIT_T1 = 40e-6              # s
QUBIT_T2 = 40e-6              # s
DISSIPATIVE_D_MAX = 1.0


def photonic_k_terms(omega: float = PHOTONIC_OMEGA, t_f: float = PHOTONIC_T_F) -> int:
    """Sine-basis size covering the resonant index k ~ omega t_f / pi.

    The displacement kernel oscillates at omega, so a basis without
    near-resonant terms needs unphysically large coefficients; three terms
    of headroom past resonance keep the least-norm pulse at the hundreds
    of MHz scale.
    """
    return math.ceil(omega * t_f / math.pi) + 3


def design_photonic_pulse(d_max: float, omega: float = PHOTONIC_OMEGA,
                          t_f: float = PHOTONIC_T_F) -> DesignResult:
    problem = DesignProblem(
        kind="photonic", omega=omega, t_f=t_f,
        k_terms=photonic_k_terms(omega, t_f), d_max=d_max,
    )
    return design_photonic(problem)


def design_ghz_pulse(omega: float = BUS_OMEGA, t_f: float = QUBIT_T_F) -> DesignResult:
    """GHZ-generation pulse: |B| = pi/8 with flattened transient |A(t)|."""
    problem = DesignProblem(
        kind="qubit", omega=omega, t_f=t_f, k_terms=GHZ_K_TERMS,
        theta_target=GHZ_B_TARGET,
    )
    return design_qubit_minimax(problem)


def photonic_layout(n_modes: int, d_max: float, truncation: Optional[int] = None):
    dim = truncation or displaced_mode_dim(d_max)
    return make_layout(
        [QubitSpec(QUBIT_FREQ)],
        [ModeSpec(PHOTONIC_OMEGA, dim)] * n_modes,
        max_dim=int(4e6),
    )


def qubit_layout(n_qubits: int, mode_dim: int = VACUUM_MODE_DIM):
    return make_layout(
        [QubitSpec(QUBIT_FREQ)] * n_qubits,
        [ModeSpec(BUS_OMEGA, mode_dim)],
        max_dim=int(4e6),
    )


def evolve_norm_clean(layout, pulse, initial, t_f: float, frame: str = "interaction",
                      record_states: bool = False, max_halvings: int = 6,
                      record_stride: Optional[int] = None) -> TrajectoryRecord:
    """Closed run at the largest dt whose full-run norm drift stays <= 1e-8.

    Starts at the resolution cap and halves dt until the drift target
    holds; wide qubit registers need a few halvings because the drive norm
    grows with the register size.
    """
    _, dt_cap = EvolutionConfig(t_f=t_f, frame=frame).resolve_steps(layout)
    last_exc = None
    for k in range(max_halvings + 1):
        cfg = EvolutionConfig(
            t_f=t_f, dt=dt_cap / 2**k, frame=frame,
            record_states=record_states, record_stride=record_stride,
        )
        try:
            rec = schrodinger_evolve(layout, pulse, initial, cfg)
        except IntegrationError as exc:
            last_exc = exc
            continue
        if np.abs(rec.norms - 1.0).max() <= 1e-8:
            return rec
    raise IntegrationError(
        f"norm drift target not reached after {max_halvings} halvings: {last_exc}"
    )


@dataclass
class FidelitySummary:
    """Fidelities against both GHZ phase conventions plus run metadata."""

    value: float                 # against the convention the drive realizes
    stated_phase: float          # against exp(+i pi (N+1)/2)
    conjugate_phase: float       # against exp(-i pi (N+1)/2)
    extras: dict = field(default_factory=dict)


def run_photonic_ghz(n_modes: int, d_max: float, record_states: bool = False,
                     design: Optional[DesignResult] = None):
    """Design (or reuse) a displacement pulse and verify it by full dynamics."""
    design = design or design_photonic_pulse(d_max)
    layout = photonic_layout(n_modes, d_max)
    psi0 = basis_state(layout, [0] * layout.n_factors)
    rec = evolve_norm_clean(layout, design.pulse, psi0, design.pulse.t_f,
                            record_states=record_states)
    target = photonic_ghz_target(layout, d_max)
    f = fidelity(rec.final_state, target).value
    summary = FidelitySummary(value=f, stated_phase=f, conjugate_phase=f,
                              extras={"branch_amp": rec.branch_plus_amps[-1].tolist()})
    return design, rec, summary


def run_qubit_ghz(n_qubits: int, record_states: bool = False,
                  design: Optional[DesignResult] = None,
                  mode_dim: int = VACUUM_MODE_DIM):
    """GHZ generation on the bus mode; fidelity against both phase twins."""
    design = design or design_ghz_pulse()
    layout = qubit_layout(n_qubits, mode_dim)
    psi0 = basis_state(layout, [0] * layout.n_factors)
    rec = evolve_norm_clean(layout, design.pulse, psi0, design.pulse.t_f,
                            record_states=record_states)
    f_stated = fidelity(rec.final_state, qubit_ghz_state(layout, conjugate_phase=False)).value
    f_conj = fidelity(rec.final_state, qubit_ghz_state(layout, conjugate_phase=True)).value
    summary = FidelitySummary(value=max(f_stated, f_conj), stated_phase=f_stated,
                              conjugate_phase=f_conj)
    return design, rec, summary


def calibrate_pair_phase_convention() -> dict:
    """Constant-coupling oracle deciding the pair-phase bookkeeping.

    Two constant-coupling runs over one bus period tau = 2 pi / w, N = 2:
    g = w / (2 sqrt 2) makes |B(tau)| = pi/4, g = w / 4 makes
    |B(tau)| = pi/8.  Exactly one of them lands on a GHZ state; that one
    fixes the design target |B(t_f)| used everywhere.
    """
    w = BUS_OMEGA
    tau = TWO_PI / w
    layout = qubit_layout(2)
    psi0 = basis_state(layout, [0, 0, 0])
    out = {}
    for label, g0 in (("pi/4", w / (2.0 * math.sqrt(2.0))), ("pi/8", w / 4.0)):
        rec = evolve_norm_clean(layout, ConstantPulse(g0, tau), psi0, tau)
        f = max(
            fidelity(rec.final_state, qubit_ghz_state(layout, conjugate_phase=False)).value,
            fidelity(rec.final_state, qubit_ghz_state(layout, conjugate_phase=True)).value,
        )
        out[label] = f
    winners = [k for k, v in out.items() if v >= 0.99]
    out["selected"] = winners[0] if len(winners) == 1 else "ambiguous"
    out["pair_phase_rule"] = "theta_pair = 2 * B(t_f) per unordered pair"
    return out


def convention_ledger(dissipator_basis: str = "energy-eigenbasis",
                      frame: str = "lab") -> dict:
    """Conventions embedded in every run report."""
    return {
        "pair_phase_rule": "theta_pair = 2 * B(t_f) per unordered pair",
        "ghz_b_target": GHZ_B_TARGET,
        "ghz_phase_realized": "exp(-i pi (N+1)/2) on the all-excited branch",
        "sigma_z_convention": "sigma_z |e> = +|e>",
        "gate_sign": "per-pair factor cos(theta) I - i sin(theta) XX",
        "rate_convention": "kappa, gamma, gamma_phi enter the generator in 1/s",
        "dissipator_basis": dissipator_basis,
        "open_run_frame": frame,
    }


def _dissipative_rates():
    return CAVITY_KAPPA, 1.0 / QUBIT_T1, 1.0 / QUBIT_T2


def run_dissipative_photonic(n_modes: int, dissipator_basis: str = "energy-eigenbasis",
                             d_max: float = DISSIPATIVE_D_MAX,
                             design: Optional[DesignResult] = None) -> FidelitySummary:
    """Open-system displacement run; lab frame, rotated back for scoring."""
    design = design or design_photonic_pulse(d_max)
    layout = photonic_layout(n_modes, d_max)
    kappa, gamma, gamma_phi = _dissipative_rates()
    lindblad = LindbladConfig(
        kappa=(kappa,) * n_modes, gamma=(gamma,), gamma_phi=(gamma_phi,),
        dissipator_basis=dissipator_basis,
    )
    _, dt_cap = EvolutionConfig(t_f=design.pulse.t_f, frame="lab").resolve_steps(layout)
    rho0 = basis_state(layout, [0] * layout.n_factors).projector()
    rec = lindblad_evolve(layout, design.pulse, rho0,
                          EvolutionConfig(t_f=design.pulse.t_f, frame="lab", dt=dt_cap / 4),
                          lindblad, dim_cap=4096)
    u0 = free_frame_rotation(layout, design.pulse.t_f)
    rho_int = u0.conj().T @ rec.final_state.matrix @ u0
    rho_int = DensityMatrix(0.5 * (rho_int + rho_int.conj().T), layout, validate=False)
    target = photonic_ghz_target(layout, d_max)
    f = fidelity(target, rho_int).value
    return FidelitySummary(value=f, stated_phase=f, conjugate_phase=f,
                           extras={"trace": float(rec.norms[-1])})


def run_dissipative_qubit(n_qubits: int, dissipator_basis: str = "energy-eigenbasis",
                          design: Optional[DesignResult] = None) -> FidelitySummary:
    """Open-system GHZ run for the qubit register."""
    design = design or design_ghz_pulse()
    layout = qubit_layout(n_qubits)
    kappa, gamma, gamma_phi = _dissipative_rates()
    lindblad = LindbladConfig(
        kappa=(kappa,), gamma=(gamma,) * n_qubits, gamma_phi=(gamma_phi,) * n_qubits,
        dissipator_basis=dissipator_basis,
    )
    _, dt_cap = EvolutionConfig(t_f=design.pulse.t_f, frame="lab").resolve_steps(layout)
    rho0 = basis_state(layout, [0] * layout.n_factors).projector()
    rec = lindblad_evolve(layout, design.pulse, rho0,
                          EvolutionConfig(t_f=design.pulse.t_f, frame="lab", dt=dt_cap / 4),
                          lindblad, dim_cap=4096)
    u0 = free_frame_rotation(layout, design.pulse.t_f)
    rho_int = u0.conj().T @ rec.final_state.matrix @ u0
    rho_int = DensityMatrix(0.5 * (rho_int + rho_int.conj().T), layout, validate=False)
    f_stated = fidelity(qubit_ghz_state(layout, conjugate_phase=False), rho_int).value
    f_conj = fidelity(qubit_ghz_state(layout, conjugate_phase=True), rho_int).value
    return FidelitySummary(value=max(f_stated, f_conj), stated_phase=f_stated,
                           conjugate_phase=f_conj,
                           extras={"trace": float(rec.norms[-1])})


# ---------------------------------------------------------------------------
# Figure-style data products.  Each writes plot-ready CSV files and returns
# the payload it wrote, so tests can assert on the same numbers.
# ---------------------------------------------------------------------------

def _pulse_trajectory_columns(pulse: FourierPulse, omega: float, n: int = 801):
    from .pulses import auxiliary_from_pulse, lagrangian_phase

    ts = np.linspace(0.0, pulse.t_f, n)
    g = np.asarray(pulse.value(ts), dtype=float)
    aux = auxiliary_from_pulse(pulse, omega, n_samples=n)
    phase = lagrangian_phase(pulse, omega, n_samples=2 * n - 1)
    beta = np.interp(ts, phase.times, phase.beta)
    return ts, g, aux.g_c, aux.g_c_dot, beta


def reproduce_fig1(outdir) -> dict:
    """Designed pulse and auxiliary trajectories for both branches."""
    from pathlib import Path
    from .io import write_csv

    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = {}
    for d_max in (1.0, 3.0, 5.0):
        res = design_photonic_pulse(d_max)
        ts, g, g_c, g_c_dot, beta = _pulse_trajectory_columns(res.pulse, PHOTONIC_OMEGA)
        path = outdir / f"fig1a_dmax{int(d_max)}.csv"
        write_csv(path, ["t_s", "g_rad_per_s", "g_c_rad_per_s", "g_c_dot_rad_per_s2", "beta_rad"],
                  [ts, g, g_c, g_c_dot, beta])
        written[f"fig1a_dmax{int(d_max)}"] = str(path)
    qres = design_qubit(DesignProblem(kind="qubit", omega=BUS_OMEGA, t_f=QUBIT_T_F,
                                      k_terms=6, theta_target=math.pi / 4))
    ts, g, g_c, g_c_dot, beta = _pulse_trajectory_columns(qres.pulse, BUS_OMEGA)
    path = outdir / "fig1b.csv"
    write_csv(path, ["t_s", "g_rad_per_s", "g_c_rad_per_s", "g_c_dot_rad_per_s2", "beta_rad"],
              [ts, g, g_c, g_c_dot, beta])
    written["fig1b"] = str(path)
    return written


def reproduce_fig2(outdir) -> dict:
    """Displacement and gate-coefficient trajectories of the designed pulses."""
    from pathlib import Path
    from .functionals import gate_trajectories
    from .io import write_csv

    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = {}
    for d_max in (1.0, 3.0, 5.0):
        res = design_photonic_pulse(d_max)
        tr = gate_trajectories(res.pulse, PHOTONIC_OMEGA, n_samples=801)
        path = outdir / f"fig2a_dmax{int(d_max)}.csv"
        write_csv(path, ["t_s", "abs_alpha"], [tr.times, np.abs(tr.alpha)])
        written[f"fig2a_dmax{int(d_max)}"] = str(path)
    qres = design_qubit(DesignProblem(kind="qubit", omega=BUS_OMEGA, t_f=QUBIT_T_F,
                                      k_terms=6, theta_target=math.pi / 4))
    tr = gate_trajectories(qres.pulse, BUS_OMEGA, n_samples=801)
    path_b = Path(outdir) / "fig2b.csv"
    write_csv(path_b, ["t_s", "re_a", "im_a"], [tr.times, tr.gate_a.real, tr.gate_a.imag])
    path_c = Path(outdir) / "fig2c.csv"
    write_csv(path_c, ["t_s", "re_b", "im_b"], [tr.times, tr.gate_b.real, tr.gate_b.imag])
    written["fig2b"] = str(path_b)
    written["fig2c"] = str(path_c)
    return written


def reproduce_fig3(outdir, design: Optional[DesignResult] = None) -> dict:
    """Wigner map and marginals of the first mode after the M=3 run."""
    from pathlib import Path
    from .analysis import default_wigner_axes, wigner, wigner_marginals
    from .hilbert import partial_trace
    from .io import write_csv

    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    d_max = 3.0
    design, rec, summary = run_photonic_ghz(3, d_max, design=design)
    rho1 = partial_trace(rec.final_state, [1])
    xs, ps = default_wigner_axes(d_max)
    grid = wigner(rho1, xs, ps)
    p_x, p_p = wigner_marginals(grid)
    xg, pg = np.meshgrid(grid.xs, grid.ps, indexing="ij")
    write_csv(outdir / "fig3_wigner.csv", ["x", "p", "w"],
              [xg.reshape(-1), pg.reshape(-1), grid.values.reshape(-1)])
    np.save(outdir / "fig3_wigner.npy", grid.values)
    write_csv(outdir / "fig3_marginal_x.csv", ["x", "p_x"], [grid.xs, p_x])
    write_csv(outdir / "fig3_marginal_p.csv", ["p", "p_p"], [grid.ps, p_p])
    return {
        "fidelity": summary.value,
        "wigner_csv": str(outdir / "fig3_wigner.csv"),
        "grid": grid,
        "marginals": (p_x, p_p),
    }


def reproduce_fig4a(outdir, modes=(1, 2, 3, 4)) -> dict:
    """Closed-run fidelity versus number of modes at d_max = 3."""
    from pathlib import Path
    from .io import write_csv

    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    design = design_photonic_pulse(3.0)
    rows = []
    for m in modes:
        _, _, summary = run_photonic_ghz(m, 3.0, design=design)
        rows.append((m, summary.value))
    ms = np.array([r[0] for r in rows], dtype=float)
    fs = np.array([r[1] for r in rows])
    write_csv(Path(outdir) / "fig4a.csv", ["n_modes", "fidelity"], [ms, fs])
    return {"fidelities": dict(rows)}


def reproduce_fig4b(outdir, registers=(2, 4, 6, 8, 10, 12)) -> dict:
    """Closed-run fidelity versus register size for the GHZ pulse."""
    from pathlib import Path
    from .io import write_csv

    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    design = design_ghz_pulse()
    rows = []
    for n in registers:
        _, _, summary = run_qubit_ghz(n, design=design)
        rows.append((n, summary.value))
    ns = np.array([r[0] for r in rows], dtype=float)
    fs = np.array([r[1] for r in rows])
    write_csv(Path(outdir) / "fig4b.csv", ["n_qubits", "fidelity"], [ns, fs])
    return {"fidelities": dict(rows)}


def reproduce_fig5(outdir, design: Optional[DesignResult] = None) -> dict:
    """Two-qubit populations and fidelity-versus-time curves."""
    from pathlib import Path
    from .io import write_csv

    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    design = design or design_ghz_pulse()
    layout = qubit_layout(2)
    psi0 = basis_state(layout, [0, 0, 0])
    rec = evolve_norm_clean(layout, design.pulse, psi0, design.pulse.t_f,
                            record_states=True, record_stride=None)
    pops = populations(rec, ["gg", "ge", "eg", "ee"])
    write_csv(Path(outdir) / "fig5a.csv",
              ["t_s", "p_gg", "p_ge", "p_eg", "p_ee"],
              [rec.times, pops["gg"], pops["ge"], pops["eg"], pops["ee"]])
    target = qubit_ghz_state(layout, conjugate_phase=True)
    fid_t = np.array([fidelity(s, target).value for s in rec.states])
    write_csv(Path(outdir) / "fig5b.csv", ["t_s", "fidelity"], [rec.times, fid_t])
    return {"record": rec, "populations": pops, "fidelity_curve": fid_t}


FIGURE_RECIPES = {
    "fig1": reproduce_fig1,
    "fig2": reproduce_fig2,
    "fig3": reproduce_fig3,
    "fig4a": reproduce_fig4a,
    "fig4b": reproduce_fig4b,
    "fig5": reproduce_fig5,
}
