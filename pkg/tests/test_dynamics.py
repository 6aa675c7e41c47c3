import math

import numpy as np
import pytest

import ghzpulse._kernels as kernels
from ghzpulse.dynamics import (
    EvolutionConfig,
    LindbladConfig,
    free_frame_rotation,
    lindblad_evolve,
    schrodinger_evolve,
)
from ghzpulse.errors import ConfigError, IntegrationError
from ghzpulse.hilbert import (
    ModeSpec,
    QubitSpec,
    basis_state,
    coherent_state,
    make_layout,
    tensor_state,
)
from ghzpulse.pulses import ConstantPulse, FourierPulse

TWO_PI = 2 * math.pi
W_M = TWO_PI * 6.6e9
W_Q = TWO_PI * 10e9


def small_layout(mode_dim=16):
    return make_layout([QubitSpec(W_Q)], [ModeSpec(W_M, mode_dim)])


class TestConfig:
    def test_dt_cap_enforced(self):
        lay = small_layout()
        cfg = EvolutionConfig(t_f=1e-9, dt=1e-11)
        with pytest.raises(ConfigError, match="resolution"):
            cfg.resolve_steps(lay)

    def test_dt_must_divide(self):
        lay = small_layout()
        cfg = EvolutionConfig(t_f=1e-9, dt=3.3e-13)
        with pytest.raises(ConfigError, match="integer multiple"):
            cfg.resolve_steps(lay)

    def test_auto_dt_at_cap(self):
        lay = small_layout()
        n, dt = EvolutionConfig(t_f=3.74e-9).resolve_steps(lay)
        assert dt <= (TWO_PI / W_M) / 200 * (1 + 1e-12)
        assert abs(n * dt - 3.74e-9) < 1e-20

    def test_pulse_duration_must_match(self):
        lay = small_layout()
        psi0 = basis_state(lay, [0, 0])
        with pytest.raises(ConfigError, match="duration"):
            schrodinger_evolve(lay, ConstantPulse(1e8, 2e-9), psi0,
                               EvolutionConfig(t_f=1e-9))

    def test_bad_frame(self):
        with pytest.raises(ConfigError):
            EvolutionConfig(t_f=1e-9, frame="rotating")


class TestClosedEvolution:
    def test_zero_pulse_leaves_state_unchanged(self):
        lay = small_layout()
        psi0 = tensor_state(lay, [np.array([0.6, 0.8]), coherent_state(16, 0.5)])
        rec = schrodinger_evolve(lay, ConstantPulse(0.0, 1e-9), psi0,
                                 EvolutionConfig(t_f=1e-9))
        assert abs(abs(psi0.overlap(rec.final_state)) ** 2 - 1) < 1e-12

    def test_constant_coupling_matches_branch_displacement(self):
        # analytic image: (|+>|alpha> + |->|-alpha>)/sqrt(2)
        from ghzpulse.functionals import displacement

        lay = small_layout(mode_dim=20)
        g0 = TWO_PI * 200e6
        t_f = 3 * TWO_PI / W_M
        psi0 = basis_state(lay, [0, 0])
        rec = schrodinger_evolve(lay, ConstantPulse(g0, t_f), psi0,
                                 EvolutionConfig(t_f=t_f))
        alpha = complex(displacement(ConstantPulse(g0, t_f), W_M, t_f))
        plus = np.array([1, 1]) / math.sqrt(2)
        minus = np.array([1, -1]) / math.sqrt(2)
        target = (np.kron(plus, coherent_state(20, alpha))
                  + np.kron(minus, coherent_state(20, -alpha))) / math.sqrt(2)
        overlap = abs(np.vdot(target, rec.final_state.amplitudes)) ** 2
        assert overlap >= 1 - 1e-6

    def test_step_halving_self_convergence(self):
        lay = small_layout(mode_dim=10)
        p = FourierPulse((2e8, -1e8), 1.0e-9)
        psi0 = basis_state(lay, [0, 0])
        n, dt = EvolutionConfig(t_f=1e-9).resolve_steps(lay)
        rec1 = schrodinger_evolve(lay, p, psi0, EvolutionConfig(t_f=1e-9, dt=dt))
        rec2 = schrodinger_evolve(lay, p, psi0, EvolutionConfig(t_f=1e-9, dt=dt / 2))
        f = abs(rec1.final_state.overlap(rec2.final_state)) ** 2
        assert abs(f - 1) < 1e-8

    def test_norm_recorded_and_preserved(self):
        lay = small_layout(mode_dim=12)
        p = FourierPulse((2e8,), 1.0e-9)
        rec = schrodinger_evolve(lay, p, basis_state(lay, [0, 0]),
                                 EvolutionConfig(t_f=1e-9))
        assert np.abs(rec.norms - 1).max() < 1e-8

    def test_fast_path_matches_generic(self):
        lay = make_layout([QubitSpec(W_Q)], [ModeSpec(W_M, 6)] * 3)
        p = FourierPulse((1e8, -2e8, 1.5e8), 1.0e-9)
        psi0 = basis_state(lay, [0, 0, 0, 0])
        cfg = EvolutionConfig(t_f=1e-9)
        fast = schrodinger_evolve(lay, p, psi0, cfg)
        assert kernels.HAVE_NUMBA
        try:
            kernels.HAVE_NUMBA = False
            slow = schrodinger_evolve(lay, p, psi0, cfg)
        finally:
            kernels.HAVE_NUMBA = True
        assert np.abs(fast.final_state.amplitudes - slow.final_state.amplitudes).max() < 1e-12

    def test_lab_frame_equals_rotated_interaction_frame(self):
        lay = small_layout(mode_dim=12)
        g0 = TWO_PI * 100e6
        n, dt = EvolutionConfig(t_f=1e-9, frame="lab").resolve_steps(lay)
        t_f = 2000 * dt / 2
        cfg_lab = EvolutionConfig(t_f=t_f, frame="lab", dt=dt / 2)
        cfg_int = EvolutionConfig(t_f=t_f, frame="interaction", dt=dt / 2)
        psi0 = basis_state(lay, [0, 0])
        lab = schrodinger_evolve(lay, ConstantPulse(g0, t_f), psi0, cfg_lab)
        inter = schrodinger_evolve(lay, ConstantPulse(g0, t_f), psi0, cfg_int)
        u0 = free_frame_rotation(lay, t_f)
        back = u0.conj().T @ lab.final_state.amplitudes
        assert abs(abs(np.vdot(back, inter.final_state.amplitudes)) ** 2 - 1) < 1e-8

    def test_branch_amplitude_tracks_displacement(self):
        from ghzpulse.functionals import displacement
        from ghzpulse.recipes import design_photonic_pulse, photonic_layout

        design = design_photonic_pulse(1.0)
        lay = photonic_layout(1, 1.0)
        rec = schrodinger_evolve(lay, design.pulse, basis_state(lay, [0, 0]),
                                 EvolutionConfig(t_f=design.pulse.t_f))
        alphas = displacement(design.pulse, W_M, rec.times)
        diffs = np.abs(rec.branch_plus_amps[:, 0] - alphas)
        assert diffs.max() < 2e-3

    def test_populations_sum_to_one(self):
        lay = make_layout([QubitSpec(W_Q)] * 2, [ModeSpec(TWO_PI * 1e9, 6)])
        p = FourierPulse((5e8, 2e8, -1e8), 1.89e-9)
        rec = schrodinger_evolve(lay, p, basis_state(lay, [0, 0, 0]),
                                 EvolutionConfig(t_f=1.89e-9))
        assert np.abs(rec.qubit_probs.sum(axis=1) - 1).max() < 1e-8

    def test_record_states_and_stride(self):
        lay = small_layout(mode_dim=8)
        p = FourierPulse((1e8,), 1.0e-9)
        rec = schrodinger_evolve(lay, p, basis_state(lay, [0, 0]),
                                 EvolutionConfig(t_f=1e-9, record_stride=50,
                                                 record_states=True))
        assert len(rec.states) == len(rec.times)
        assert abs(rec.states[-1].overlap(rec.final_state)) ** 2 > 1 - 1e-12


class TestLindblad:
    def test_zero_rates_match_closed(self):
        lay = small_layout(mode_dim=10)
        g0 = TWO_PI * 100e6
        _, dt_cap = EvolutionConfig(t_f=1e-9, frame="lab").resolve_steps(lay)
        t_f = 1600 * dt_cap / 4
        cfg = EvolutionConfig(t_f=t_f, frame="lab", dt=dt_cap / 4)
        psi0 = basis_state(lay, [0, 0])
        closed = schrodinger_evolve(lay, ConstantPulse(g0, t_f), psi0, cfg)
        opened = lindblad_evolve(lay, ConstantPulse(g0, t_f), psi0.projector(),
                                 cfg, LindbladConfig())
        f = np.real(np.vdot(closed.final_state.amplitudes,
                            opened.final_state.matrix @ closed.final_state.amplitudes))
        assert abs(f - 1) < 1e-8

    def test_damped_cavity_amplitude_decay(self):
        lay = small_layout(mode_dim=12)
        kappa = TWO_PI * 5e6
        alpha0 = 1.0
        _, dt_cap = EvolutionConfig(t_f=1e-9, frame="lab").resolve_steps(lay)
        t_f = 1800 * dt_cap / 4
        cfg = EvolutionConfig(t_f=t_f, frame="lab", dt=dt_cap / 4)
        psi0 = tensor_state(lay, [np.array([1, 0]), coherent_state(12, alpha0)])
        rec = lindblad_evolve(lay, ConstantPulse(0.0, t_f), psi0.projector(), cfg,
                              LindbladConfig(kappa=(kappa,), gamma=(0.0,),
                                             gamma_phi=(0.0,)))
        pred = alpha0 * np.exp(-1j * W_M * t_f) * np.exp(-kappa * t_f / 2)
        assert abs(rec.mode_amps[-1, 0] - pred) < 1e-6

    def test_trace_and_hermiticity_preserved(self):
        lay = small_layout(mode_dim=8)
        g0 = TWO_PI * 100e6
        _, dt_cap = EvolutionConfig(t_f=1e-9, frame="lab").resolve_steps(lay)
        t_f = 1200 * dt_cap / 4
        cfg = EvolutionConfig(t_f=t_f, frame="lab", dt=dt_cap / 4)
        lc = LindbladConfig(kappa=(TWO_PI * 1e6,), gamma=(2e4,), gamma_phi=(2e4,))
        rec = lindblad_evolve(lay, ConstantPulse(g0, t_f),
                              basis_state(lay, [0, 0]).projector(), cfg, lc)
        assert np.abs(rec.norms - 1).max() < 1e-8
        rho = rec.final_state.matrix
        assert np.abs(rho - rho.conj().T).max() < 1e-10

    def test_energy_basis_frame_equivalence(self):
        lay = small_layout(mode_dim=10)
        g0 = TWO_PI * 100e6
        _, dt_cap = EvolutionConfig(t_f=1e-9, frame="lab").resolve_steps(lay)
        t_f = 1600 * dt_cap / 4
        lc = LindbladConfig(kappa=(TWO_PI * 2e6,), gamma=(TWO_PI * 1e5,),
                            gamma_phi=(TWO_PI * 1e5,),
                            dissipator_basis="energy-eigenbasis")
        psi0 = basis_state(lay, [0, 0])
        lab = lindblad_evolve(lay, ConstantPulse(g0, t_f), psi0.projector(),
                              EvolutionConfig(t_f=t_f, frame="lab", dt=dt_cap / 4), lc)
        inter = lindblad_evolve(lay, ConstantPulse(g0, t_f), psi0.projector(),
                                EvolutionConfig(t_f=t_f, frame="interaction",
                                                dt=dt_cap / 4), lc)
        u0 = free_frame_rotation(lay, t_f)
        back = u0.conj().T @ lab.final_state.matrix @ u0
        assert np.abs(back - inter.final_state.matrix).max() < 1e-8

    def test_literal_basis_requires_lab_frame(self):
        lay = small_layout(mode_dim=8)
        lc = LindbladConfig(kappa=(1e6,), gamma=(1e4,), gamma_phi=(1e4,),
                            dissipator_basis="z-basis-literal")
        with pytest.raises(ConfigError, match="energy-eigenbasis"):
            lindblad_evolve(lay, ConstantPulse(0.0, 1e-9),
                            basis_state(lay, [0, 0]).projector(),
                            EvolutionConfig(t_f=1e-9, frame="interaction"), lc)

    def test_dim_cap_enforced(self):
        lay = make_layout([QubitSpec(W_Q)], [ModeSpec(W_M, 20)] * 3)
        lc = LindbladConfig()
        with pytest.raises(ConfigError, match="cap"):
            lindblad_evolve(lay, ConstantPulse(0.0, 1e-9),
                            basis_state(lay, [0, 0, 0, 0]).projector(),
                            EvolutionConfig(t_f=1e-9, frame="lab"), lc)

    def test_rate_validation(self):
        with pytest.raises(ConfigError):
            LindbladConfig(kappa=(-1.0,))
        with pytest.raises(ConfigError):
            LindbladConfig(dissipator_basis="other")
