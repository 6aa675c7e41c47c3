import math

import numpy as np
import pytest

from ghzpulse.errors import ConfigError, TruncationError
from ghzpulse.hilbert import (
    DensityMatrix,
    ModeSpec,
    QubitSpec,
    StateVector,
    basis_state,
    coherent_state,
    coherent_truncation_deficit,
    displaced_mode_dim,
    embed_mode_op,
    embed_qubit_op,
    make_layout,
    partial_trace,
    tensor_state,
)

W_Q = 2 * math.pi * 10e9
W_M = 2 * math.pi * 6.6e9


def qubits(n):
    return [QubitSpec(W_Q)] * n


def modes(m, dim):
    return [ModeSpec(W_M, dim)] * m


class TestLayout:
    def test_single_qubit_dim(self):
        assert make_layout(qubits(1), []).dim == 2

    def test_three_modes_dim(self):
        assert make_layout(qubits(1), modes(3, 12)).dim == 2 * 12**3

    def test_twelve_qubits_one_mode(self):
        assert make_layout(qubits(12), modes(1, 8)).dim == 32768

    def test_empty_rejected(self):
        with pytest.raises(ConfigError):
            make_layout([], [])

    def test_dim_cap_rejected(self):
        with pytest.raises(ConfigError, match="cap"):
            make_layout(qubits(1), modes(4, 40))

    def test_flat_index_is_c_order(self):
        lay = make_layout(qubits(1), modes(1, 3))
        assert lay.flat_index([1, 1]) == 4

    def test_bad_frequency(self):
        with pytest.raises(ConfigError):
            QubitSpec(0.0)
        with pytest.raises(ConfigError):
            ModeSpec(-1.0, 4)

    def test_truncation_minimum(self):
        with pytest.raises(ConfigError):
            ModeSpec(1e9, 1)


class TestQubitOps:
    def test_sigma_x_flips_ground(self):
        lay = make_layout(qubits(1), [])
        g = basis_state(lay, [0])
        e = basis_state(lay, [1])
        out = embed_qubit_op(lay, 0, "x").apply(g)
        assert np.allclose(out, e.amplitudes)

    def test_sigma_z_sign_convention(self):
        lay = make_layout(qubits(1), [])
        e = basis_state(lay, [1])
        out = embed_qubit_op(lay, 0, "z").apply(e)
        assert np.allclose(out, +e.amplitudes)
        g = basis_state(lay, [0])
        assert np.allclose(embed_qubit_op(lay, 0, "z").apply(g), -g.amplitudes)

    def test_sigma_x_squares_to_identity(self):
        lay = make_layout(qubits(2), modes(1, 4))
        rng = np.random.default_rng(3)
        v = rng.standard_normal(lay.dim) + 1j * rng.standard_normal(lay.dim)
        v /= np.linalg.norm(v)
        sx = embed_qubit_op(lay, 1, "x")
        assert np.allclose(sx.apply(sx.apply(v)), v, atol=1e-14)

    def test_index_out_of_range(self):
        lay = make_layout(qubits(1), [])
        with pytest.raises(ConfigError):
            embed_qubit_op(lay, 1, "x")

    def test_disjoint_embeddings_commute(self):
        lay = make_layout(qubits(2), modes(1, 8))  # dim 32 <= 64
        a = embed_qubit_op(lay, 0, "y").dense()
        b = embed_mode_op(lay, 0, "a").dense()
        comm = a @ b - b @ a
        assert np.linalg.norm(comm, 2) < 1e-12


class TestModeOps:
    def test_lowering_annihilates_vacuum(self):
        lay = make_layout([], modes(1, 5))
        vac = basis_state(lay, [0])
        assert np.allclose(embed_mode_op(lay, 0, "a").apply(vac), 0.0)

    def test_raising_vacuum(self):
        lay = make_layout([], modes(1, 5))
        vac = basis_state(lay, [0])
        one = basis_state(lay, [1])
        assert np.allclose(embed_mode_op(lay, 0, "adag").apply(vac), one.amplitudes)

    def test_hard_truncation_top_level(self):
        lay = make_layout([], modes(1, 5))
        top = basis_state(lay, [4])
        assert np.allclose(embed_mode_op(lay, 0, "adag").apply(top), 0.0)

    def test_coherent_number_expectation(self):
        lay = make_layout([], modes(1, 40))
        alpha = 2.0
        psi = StateVector(coherent_state(40, alpha), lay)
        n_op = embed_mode_op(lay, 0, "n")
        val = np.vdot(psi.amplitudes, n_op.apply(psi)).real
        assert abs(val - abs(alpha) ** 2) < 1e-6

    def test_dense_refused_above_limit(self):
        lay = make_layout(qubits(1), modes(4, 10))
        with pytest.raises(ConfigError, match="dense"):
            embed_mode_op(lay, 0, "a").dense()


class TestCoherent:
    def test_alpha_zero_is_vacuum(self):
        v = coherent_state(6, 0.0)
        assert np.allclose(v, np.eye(6)[0])

    def test_overlap_formula(self):
        a, b = 1.0, -1.0
        va, vb = coherent_state(40, a), coherent_state(40, b)
        assert abs(abs(np.vdot(va, vb)) ** 2 - math.exp(-abs(a - b) ** 2)) < 1e-6

    def test_poisson_tail_bound(self):
        assert coherent_truncation_deficit(40, 3.0) < 1e-8

    def test_truncation_error_raised(self):
        with pytest.raises(TruncationError):
            coherent_state(6, 3.0)

    @pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0, 3.0])
    def test_ladder_eigenrelation(self, alpha):
        # a|alpha> = alpha|alpha> away from the truncation edge: the
        # relation is exact on the kept interior and the expectation
        # deviates only by the clipped-edge population.
        from ghzpulse.hilbert import displaced_mode_dim
        dim = displaced_mode_dim(alpha)
        v = coherent_state(dim, alpha)
        a_mat = np.diag(np.sqrt(np.arange(1, dim)), 1)
        resid = a_mat @ v - alpha * v
        assert np.abs(resid[: dim - 1]).max() < 1e-12 * max(1.0, alpha)
        assert abs(np.vdot(v, a_mat @ v) - alpha) < 1e-5 * max(1.0, alpha)

    def test_displaced_mode_dim_rule(self):
        assert displaced_mode_dim(3.0) == 28
        assert displaced_mode_dim(0.0) == 10
        for d in (1.0, 3.0, 5.0):
            assert coherent_truncation_deficit(displaced_mode_dim(d), d) < 5e-7


class TestTensorState:
    def test_ground_vacuum_is_first_basis_vector(self):
        lay = make_layout(qubits(1), modes(1, 4))
        psi = tensor_state(lay, [np.array([1, 0]), np.eye(4)[0]])
        assert psi.amplitudes[0] == 1.0
        assert np.allclose(psi.amplitudes[1:], 0.0)

    def test_normalized_product(self):
        lay = make_layout(qubits(2), modes(1, 3))
        rng = np.random.default_rng(0)
        factors = [rng.standard_normal(d) + 1j * rng.standard_normal(d) for d in lay.dims]
        psi = tensor_state(lay, factors)
        assert abs(psi.norm() - 1.0) < 1e-12

    def test_excited_one_photon_flat_index(self):
        lay = make_layout(qubits(1), modes(1, 3))
        psi = tensor_state(lay, [np.array([0, 1]), np.eye(3)[1]])
        assert abs(psi.amplitudes[4]) == 1.0

    def test_dimension_mismatch(self):
        lay = make_layout(qubits(1), modes(1, 3))
        with pytest.raises(ConfigError):
            tensor_state(lay, [np.array([1, 0]), np.eye(4)[0]])


class TestPartialTrace:
    def test_product_state_gives_projectors(self):
        lay = make_layout(qubits(1), modes(1, 6))
        q = np.array([0.6, 0.8])
        m = coherent_state(6, 0.3)
        psi = tensor_state(lay, [q, m])
        red_q = partial_trace(psi, [0])
        assert np.allclose(red_q.matrix, np.outer(q, q.conj()), atol=1e-12)
        red_m = partial_trace(psi, [1])
        assert np.allclose(red_m.matrix, np.outer(m, m.conj()), atol=1e-12)

    def test_bell_state_reduces_to_maximally_mixed(self):
        lay = make_layout(qubits(2), [])
        bell = StateVector(np.array([1, 0, 0, 1]) / math.sqrt(2), lay)
        red = partial_trace(bell, [0])
        assert np.allclose(red.matrix, np.eye(2) / 2, atol=1e-12)

    def test_trace_preserved_random_density(self):
        lay = make_layout(qubits(2), modes(1, 3))
        rng = np.random.default_rng(5)
        a = rng.standard_normal((lay.dim, lay.dim)) + 1j * rng.standard_normal((lay.dim, lay.dim))
        rho = a @ a.conj().T
        rho /= np.trace(rho).real
        dm = DensityMatrix(rho, lay)
        for keep in ([0], [1, 2], [0, 2]):
            red = partial_trace(dm, keep)
            assert abs(red.trace() - dm.trace()) < 1e-10

    def test_roundtrip_single_factor_projector(self):
        lay = make_layout(qubits(1), modes(2, 3))
        rng = np.random.default_rng(9)
        factors = [rng.standard_normal(d) + 1j * rng.standard_normal(d) for d in lay.dims]
        factors = [f / np.linalg.norm(f) for f in factors]
        psi = tensor_state(lay, factors)
        for k, f in enumerate(factors):
            red = partial_trace(psi, [k])
            assert np.abs(red.matrix - np.outer(f, f.conj())).max() < 1e-12

    def test_empty_keep_rejected(self):
        lay = make_layout(qubits(1), modes(1, 3))
        psi = basis_state(lay, [0, 0])
        with pytest.raises(ConfigError):
            partial_trace(psi, [])


class TestContainers:
    def test_state_norm_validation(self):
        lay = make_layout(qubits(1), [])
        with pytest.raises(ConfigError):
            StateVector(np.array([1.0, 1.0]), lay)
        psi = StateVector(np.array([1.0, 1.0]), lay, normalize=True)
        assert abs(psi.norm() - 1.0) < 1e-12

    def test_density_validation(self):
        lay = make_layout(qubits(1), [])
        with pytest.raises(ConfigError):
            DensityMatrix(np.array([[0.5, 0.5], [0.4, 0.5]]), lay)  # not Hermitian
        with pytest.raises(ConfigError):
            DensityMatrix(np.array([[1.0, 0.0], [0.0, 0.5]]), lay)  # trace != 1
        with pytest.raises(ConfigError):
            DensityMatrix(np.array([[1.2, 0.0], [0.0, -0.2]]), lay)  # negative
