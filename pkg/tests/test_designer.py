import math

import numpy as np
import pytest

from ghzpulse.designer import (
    DesignProblem,
    DesignResult,
    OptimizerSettings,
    design_photonic,
    design_qubit,
    design_qubit_minimax,
    gradient_descent,
    peak_coupling,
)
from ghzpulse.errors import ConfigError, ConvergenceError
from ghzpulse.functionals import displacement, gate_A, gate_B, displacement_coefficients
from ghzpulse.pulses import auxiliary_from_pulse

TWO_PI = 2 * math.pi
W_PH = TWO_PI * 6.6e9
TF_PH = 3.74e-9
W_Q = TWO_PI * 1e9
TF_Q = 1.89e-9


class TestGradientDescent:
    def test_quadratic_bowl(self):
        target = np.array([1.0, -2.0, 0.5])

        def f(x):
            return float(np.sum((x - target) ** 2))

        res = gradient_descent(f, np.zeros(3), OptimizerSettings(max_iterations=200))
        assert np.abs(res.x - target).max() < 1e-8
        assert res.converged

    def test_trace_monotone_nonincreasing(self):
        rng = np.random.default_rng(0)
        a = rng.standard_normal((6, 4))

        def f(x):
            r = a @ x - 1.0
            return float(r @ r)

        res = gradient_descent(f, rng.standard_normal(4), OptimizerSettings())
        assert np.all(np.diff(res.trace) <= 0)

    def test_finite_difference_gradient_used_when_missing(self):
        res = gradient_descent(lambda x: float(x @ x), np.ones(2),
                               OptimizerSettings(max_iterations=100))
        assert np.abs(res.x).max() < 1e-6

    def test_matches_linear_solve_on_photonic_design(self):
        # two independent solution paths: min-norm linear algebra vs
        # gradient descent from the origin (which stays in the row space)
        problem = DesignProblem(kind="photonic", omega=W_PH, t_f=TF_PH,
                                k_terms=6, d_max=2.0)
        direct = design_photonic(problem)
        d_vec = displacement_coefficients(6, TF_PH, W_PH)
        m = np.vstack([d_vec.real, d_vec.imag])
        target = np.array([2.0, 0.0])
        scale = np.linalg.norm(m)

        def f(c):
            r = m @ c - target
            return float(r @ r)

        def grad(c):
            return 2.0 * m.T @ (m @ c - target)

        res = gradient_descent(
            f, np.zeros(6),
            OptimizerSettings(step_size=1.0 / scale**2, max_iterations=20000,
                              tol_objective=1e-26),
            gradient=grad,
        )
        assert np.abs(res.x - np.asarray(direct.pulse.coefficients)).max() < 1e-6 * max(
            1.0, np.abs(direct.pulse.coefficients).max()
        )


class TestPhotonicDesign:
    def test_zero_target_returns_zero_vector(self):
        res = design_photonic(DesignProblem(kind="photonic", omega=W_PH,
                                            t_f=TF_PH, k_terms=6, d_max=0.0))
        assert np.allclose(res.pulse.coefficients, 0.0)
        assert res.converged

    @pytest.mark.parametrize("d_max", [1.0, 3.0, 5.0])
    def test_reference_targets_k6(self, d_max):
        res = design_photonic(DesignProblem(kind="photonic", omega=W_PH,
                                            t_f=TF_PH, k_terms=6, d_max=d_max))
        assert res.converged
        alpha = complex(displacement(res.pulse, W_PH, TF_PH))
        assert abs(alpha - d_max) < 1e-6

    def test_peak_scales_linearly(self):
        peaks = {}
        for d_max in (1.0, 3.0, 5.0):
            res = design_photonic(DesignProblem(kind="photonic", omega=W_PH,
                                                t_f=TF_PH, k_terms=6, d_max=d_max))
            peaks[d_max] = res.peak_coupling
        assert peaks[1.0] <= peaks[3.0] <= peaks[5.0]
        assert abs(peaks[3.0] - 3 * peaks[1.0]) <= 1e-9 * peaks[3.0]
        assert abs(peaks[5.0] - 5 * peaks[1.0]) <= 1e-9 * peaks[5.0]

    def test_endpoints_vanish(self):
        res = design_photonic(DesignProblem(kind="photonic", omega=W_PH,
                                            t_f=TF_PH, k_terms=6, d_max=3.0))
        assert res.pulse.value(0.0) == 0.0
        assert abs(res.pulse.value(TF_PH)) < 1e-9 * res.peak_coupling

    def test_singular_constraint_matrix_reported(self, monkeypatch):
        import ghzpulse.designer as designer

        def collinear(k, t_f, omega):
            return (1.0 + 1.0j) * np.ones(k)

        monkeypatch.setattr(designer, "displacement_coefficients", collinear)
        with pytest.raises(ConvergenceError, match="singular"):
            design_photonic(DesignProblem(kind="photonic", omega=W_PH,
                                          t_f=TF_PH, k_terms=6, d_max=1.0))

    def test_k_minimum_enforced(self):
        with pytest.raises(ConfigError):
            DesignProblem(kind="photonic", omega=W_PH, t_f=TF_PH, k_terms=1, d_max=1.0)

    def test_determinism(self):
        p = DesignProblem(kind="photonic", omega=W_PH, t_f=TF_PH, k_terms=8, d_max=2.5)
        a = design_photonic(p)
        b = design_photonic(p)
        assert a.pulse.coefficients == b.pulse.coefficients
        assert a.peak_coupling == b.peak_coupling


class TestQubitDesign:
    def test_zero_target(self):
        res = design_qubit(DesignProblem(kind="qubit", omega=W_Q, t_f=TF_Q,
                                         k_terms=6, theta_target=0.0))
        assert np.allclose(res.pulse.coefficients, 0.0)
        assert res.converged

    def test_reference_quarter_pi(self, qubit_design_quarter_pi):
        res = qubit_design_quarter_pi
        assert res.converged
        assert res.residuals["abs_a"] < 1e-6
        assert res.residuals["re_b"] < 1e-6
        assert res.residuals["im_b"] < 1e-8

    def test_negative_target(self):
        res = design_qubit(DesignProblem(kind="qubit", omega=W_Q, t_f=TF_Q,
                                         k_terms=6, theta_target=-math.pi / 8))
        assert res.converged

    def test_restart_reconverges_quickly(self, qubit_design_quarter_pi):
        from ghzpulse.designer import gradient_descent as gd
        from ghzpulse.functionals import gate_a_coefficients, gate_b_matrix

        c0 = np.asarray(qubit_design_quarter_pi.pulse.coefficients)
        l_vec = gate_a_coefficients(6, TF_Q, W_Q)
        q = gate_b_matrix(6, TF_Q, W_Q)
        s = 0.5 * (q.real + q.real.T)
        theta = math.pi / 4

        def f(c):
            return float((l_vec.real @ c) ** 2 + (l_vec.imag @ c) ** 2
                         + (c @ s @ c - theta) ** 2)

        res = gd(f, c0, OptimizerSettings())
        assert res.iterations <= 2

    def test_final_auxiliary_boundary(self, qubit_design_quarter_pi):
        # A(t_f) = 0 forces g_c(t_f) = g_c'(t_f) = 0 through the frame map
        pulse = qubit_design_quarter_pi.pulse
        aux = auxiliary_from_pulse(pulse, W_Q)
        g_c, d1, _ = aux.evaluate(TF_Q)
        scale = np.abs(aux.g_c).max()
        assert abs(g_c) < 1e-6 * scale
        assert abs(d1) < 1e-6 * scale * W_Q

    def test_k_minimum_enforced(self):
        with pytest.raises(ConfigError):
            DesignProblem(kind="qubit", omega=W_Q, t_f=TF_Q, k_terms=2)

    def test_kind_mismatch(self):
        p = DesignProblem(kind="photonic", omega=W_PH, t_f=TF_PH, d_max=1.0)
        with pytest.raises(ConfigError):
            design_qubit(p)

    def test_determinism(self):
        p = DesignProblem(kind="qubit", omega=W_Q, t_f=TF_Q, k_terms=6,
                          theta_target=-math.pi / 8)
        assert design_qubit(p).pulse.coefficients == design_qubit(p).pulse.coefficients


class TestMinimaxDesign:
    def test_flattens_transient(self, ghz_design):
        from ghzpulse.recipes import BUS_OMEGA, GHZ_B_TARGET

        ts = np.linspace(0, TF_Q, 4001)
        max_a = np.abs(gate_A(ghz_design.pulse, BUS_OMEGA, ts)).max()
        assert max_a < 0.24
        assert ghz_design.residuals["abs_a"] < 1e-6
        assert ghz_design.residuals["re_b"] < 1e-6
        b = complex(gate_B(ghz_design.pulse, BUS_OMEGA, TF_Q))
        assert abs(b.real - GHZ_B_TARGET) < 1e-6

    def test_zero_target_shortcut(self):
        res = design_qubit_minimax(DesignProblem(kind="qubit", omega=W_Q,
                                                 t_f=TF_Q, k_terms=6,
                                                 theta_target=0.0))
        assert np.allclose(res.pulse.coefficients, 0.0)


class TestSerialization:
    def test_problem_round_trip(self):
        p = DesignProblem(kind="qubit", omega=W_Q, t_f=TF_Q, k_terms=8,
                          theta_target=0.3, tolerance=1e-7)
        q = DesignProblem.from_json(p.to_json())
        assert q == p

    def test_result_json_fields(self, qubit_design_quarter_pi):
        import json

        data = json.loads(qubit_design_quarter_pi.to_json())
        assert data["converged"] is True
        assert "pulse" in data and "coefficients_rad_per_s" in data["pulse"]
        assert data["residuals"]["abs_a"] < 1e-6
